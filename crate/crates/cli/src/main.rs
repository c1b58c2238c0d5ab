//! `hamchain`: generate instances, solve them, mine and verify blocks, keep
//! a chain file and run network simulations.
//!
//! Exit status is 0 on success, 1 when a block or chain fails verification
//! (or any other runtime failure) and 2 on usage errors.

mod chain;
mod config;
mod problem;
mod simulate;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::Config;

#[derive(Debug, Parser)]
#[command(
    name = "hamchain",
    version,
    about = "Optimization-based proof of work toolkit"
)]
struct Cli {
    /// JSON config with defaults for every subcommand.
    #[arg(long, global = true, env = "HAMCHAIN_CONFIG")]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a random sparse instance.
    Gen(problem::GenArgs),
    /// Solve an instance file.
    Solve(problem::SolveArgs),
    /// Mine a block, optionally extending a chain file.
    Mine(chain::MineArgs),
    /// Verify a block file.
    Verify(chain::VerifyArgs),
    /// Create, validate or inspect a chain file.
    Chain {
        #[command(subcommand)]
        action: chain::ChainAction,
    },
    /// Solver quality table on a seeded instance suite.
    Bench(problem::BenchArgs),
    /// Run a network scenario.
    Simulate(simulate::SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverChoice {
    Gdsim,
    Sa,
    Brute,
    Grid,
}

/// Verification or validation failure; exit status 1.
#[derive(Debug)]
pub struct Rejected(pub String);

/// Bad invocation or input that cannot be acted on; exit status 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Rejected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Rejected {}
impl std::error::Error for Usage {}

pub struct Ctx {
    pub cfg: Config,
    pub json: bool,
}

impl Ctx {
    /// Prints `value` as pretty JSON, or `human` otherwise.
    pub fn emit(
        &self,
        value: &impl serde::Serialize,
        human: impl FnOnce() -> String,
    ) -> anyhow::Result<()> {
        let text = if self.json {
            serde_json::to_string_pretty(value)? + "\n"
        } else {
            human()
        };
        write_stdout(&text)
    }
}

/// Writes to stdout, treating a closed pipe as success.
pub fn write_stdout(text: &str) -> anyhow::Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    let cfg = Config::load(cli.config.as_deref(), cli.seed)?;
    let ctx = Ctx {
        cfg,
        json: cli.json,
    };
    match cli.command {
        Command::Gen(a) => problem::gen(&ctx, a),
        Command::Solve(a) => problem::solve(&ctx, a),
        Command::Bench(a) => problem::bench(&ctx, a),
        Command::Mine(a) => chain::mine(&ctx, a),
        Command::Verify(a) => chain::verify(&ctx, a),
        Command::Chain { action } => chain::chain(&ctx, action),
        Command::Simulate(a) => simulate::simulate(&ctx, a, cli.seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(u) = e.downcast_ref::<Usage>() {
                eprintln!("error: {u}");
                eprintln!("usage: hamchain [--config <path>] [--seed <u64>] [--json] <gen|solve|mine|verify|chain|bench|simulate> ...");
                return ExitCode::from(2);
            }
            if let Some(r) = e.downcast_ref::<Rejected>() {
                eprintln!("rejected: {r}");
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(1)
        }
    }
}
