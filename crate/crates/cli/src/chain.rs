use std::fmt::Write as _;
use std::fs::{File, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Subcommand};
use hamchain_core::baselines::SaParams;
use hamchain_core::gdsim::GdParams;
use hamchain_core::ledger::{AppendOutcome, BlockStore, LedgerError};
use hamchain_core::pow::{self, Block, GdSolver, SaSolver, Solver, Transaction};
use serde::Serialize;

use crate::{Ctx, Rejected, SolverChoice, Usage};

#[derive(Debug, Args)]
pub struct MineArgs {
    /// Chain file to extend; the block is mined on its tip and appended.
    #[arg(long)]
    chain: Option<PathBuf>,
    /// Transaction payload (repeatable). Defaults to a single coinbase.
    #[arg(long = "tx")]
    txs: Vec<String>,
    /// Header timestamp; defaults to the parent's plus the target interval.
    #[arg(long)]
    timestamp: Option<u64>,
    /// Miner; only `sa` and `gdsim` can mine.
    #[arg(long, value_enum, default_value = "sa")]
    solver: SolverChoice,
    /// Last nonce tried before giving up.
    #[arg(long, default_value_t = 1000)]
    max_nonce: u32,
    /// Writes the mined block's wire encoding here.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Block file in wire encoding.
    block: PathBuf,
    /// Chain holding the block's parent. Without it the parent must be the
    /// genesis block of the configured target.
    #[arg(long)]
    chain: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ChainAction {
    /// Write a chain file holding only the genesis block.
    Init {
        path: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Re-verify every block, including each retarget.
    Validate { path: PathBuf },
    /// Print the main chain.
    Show { path: PathBuf },
}

fn open_store(ctx: &Ctx, path: &Path) -> anyhow::Result<BlockStore> {
    let f = File::open(path)
        .map_err(|e| Usage(format!("cannot open chain {}: {e}", path.display())))?;
    BlockStore::read_from(ctx.cfg.chain_params(), f).map_err(|e| ledger_failure(path, e))
}

fn ledger_failure(path: &Path, e: LedgerError) -> anyhow::Error {
    match e {
        LedgerError::Io(io) => {
            anyhow::Error::new(io).context(format!("reading {}", path.display()))
        }
        LedgerError::Rejected { index, reason } => Rejected(format!(
            "{}: block {index}: {}: {reason}",
            path.display(),
            reason.code()
        ))
        .into(),
        other => Rejected(format!("{}: {other}", path.display())).into(),
    }
}

fn append_record(path: &Path, block: &Block) -> anyhow::Result<()> {
    let bytes = block.to_bytes();
    let mut f = OpenOptions::new()
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    f.write_all(&(bytes.len() as u32).to_le_bytes())?;
    f.write_all(&bytes)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct Mined {
    block_id: String,
    height: u64,
    nonce: u32,
    attempts: u64,
    objective: f64,
    threshold: f64,
    sa_sweeps: u64,
}

pub fn mine(ctx: &Ctx, a: MineArgs) -> anyhow::Result<()> {
    if a.chain.is_none() && a.out.is_none() {
        return Err(Usage("nothing to write: pass --chain, --out or both".into()).into());
    }
    let mut store = match &a.chain {
        Some(p) => open_store(ctx, p)?,
        None => BlockStore::new(ctx.cfg.chain_params())?,
    };
    let parent = store.tip();
    let height = store.tip_height() + 1;
    let target = store.next_target(&parent)?;
    let parent_ts = store.get(&parent).expect("tip is stored").header.timestamp;
    let timestamp = a
        .timestamp
        .unwrap_or(parent_ts + (ctx.cfg.chain.target_interval.round() as u64).max(1));
    let payloads = if a.txs.is_empty() {
        vec![format!("coinbase {height}")]
    } else {
        a.txs.clone()
    };
    let txs = payloads
        .into_iter()
        .map(|p| Transaction::new(p.into_bytes()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Usage(e.to_string()))?;
    let solver: Box<dyn Solver> = match a.solver {
        SolverChoice::Sa => Box::new(SaSolver(SaParams {
            ..ctx.cfg.sa.clone()
        })),
        SolverChoice::Gdsim => Box::new(GdSolver(GdParams {
            ..ctx.cfg.gd.clone()
        })),
        other => {
            return Err(Usage(format!("{other:?} cannot mine; use --solver sa or gdsim")).into())
        }
    };
    let m = pow::mine(
        parent,
        timestamp,
        txs,
        &target,
        solver.as_ref(),
        a.max_nonce,
    )?;
    let block = m.block;
    if let Some(path) = &a.chain {
        match store.append(block.clone()) {
            AppendOutcome::Accepted { .. } => append_record(path, &block)?,
            other => anyhow::bail!("freshly mined block not accepted: {other:?}"),
        }
    }
    if let Some(path) = &a.out {
        std::fs::write(path, block.to_bytes())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let out = Mined {
        block_id: hex::encode(block.block_id),
        height,
        nonce: block.header.nonce,
        attempts: m.attempts,
        objective: block.solution.claimed_objective,
        threshold: m.threshold,
        sa_sweeps: target.sa_sweeps,
    };
    ctx.emit(&out, || {
        format!(
            "mined block {} at height {}\nnonce {} after {} attempts\nobjective {} vs baseline {}\n",
            out.block_id, out.height, out.nonce, out.attempts, out.objective, out.threshold
        )
    })
}

#[derive(Debug, Serialize)]
struct Verdict {
    valid: bool,
    block_id: String,
    objective: f64,
    threshold: f64,
}

pub fn verify(ctx: &Ctx, a: VerifyArgs) -> anyhow::Result<()> {
    let bytes = std::fs::read(&a.block)
        .map_err(|e| Usage(format!("cannot read {}: {e}", a.block.display())))?;
    let block = Block::from_bytes(&bytes).map_err(|e| Rejected(format!("malformed: {e}")))?;
    let parent = block.header.prev_id;
    let store = match &a.chain {
        Some(p) => open_store(ctx, p)?,
        None => BlockStore::new(ctx.cfg.chain_params())?,
    };
    if !store.contains(&parent) {
        let hint = if a.chain.is_none() {
            "; pass --chain with the parent's chain"
        } else {
            ""
        };
        return Err(Rejected(format!(
            "unknown-parent: parent {} is not known{hint}",
            hex::encode(parent)
        ))
        .into());
    }
    let target = store.next_target(&parent)?;
    let v = pow::verify(&block, &parent, &target)
        .map_err(|r| Rejected(format!("{}: {r}", r.code())))?;
    let out = Verdict {
        valid: true,
        block_id: hex::encode(block.block_id),
        objective: v.objective,
        threshold: v.threshold,
    };
    ctx.emit(&out, || {
        format!(
            "valid block {}\nobjective {} vs baseline {}\n",
            out.block_id, out.objective, out.threshold
        )
    })
}

pub fn chain(ctx: &Ctx, action: ChainAction) -> anyhow::Result<()> {
    match action {
        ChainAction::Init { path, force } => {
            if path.exists() && !force {
                return Err(Usage(format!(
                    "{} exists; pass --force to overwrite",
                    path.display()
                ))
                .into());
            }
            let store = BlockStore::new(ctx.cfg.chain_params())?;
            let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            store.write_to(f)?;
            let id = hex::encode(store.genesis_id());
            #[derive(Serialize)]
            struct Init {
                genesis: String,
            }
            ctx.emit(
                &Init {
                    genesis: id.clone(),
                },
                || format!("created {} with genesis {id}\n", path.display()),
            )
        }
        ChainAction::Validate { path } => {
            let store = open_store(ctx, &path)?;
            store
                .validate_chain(&store.tip())
                .map_err(|e| ledger_failure(&path, e))?;
            #[derive(Serialize)]
            struct Valid {
                valid: bool,
                height: u64,
                stored_blocks: usize,
                tip: String,
            }
            let v = Valid {
                valid: true,
                height: store.tip_height(),
                stored_blocks: store.len(),
                tip: hex::encode(store.tip()),
            };
            ctx.emit(&v, || {
                format!(
                    "valid chain: height {}, {} blocks stored, tip {}\n",
                    v.height, v.stored_blocks, v.tip
                )
            })
        }
        ChainAction::Show { path } => {
            let summary = open_store(ctx, &path)?.summary();
            ctx.emit(&summary, || {
                let mut s = format!(
                    "height {} tip {} ({} stored, {} orphans)\n",
                    summary.height, summary.tip, summary.stored_blocks, summary.orphans
                );
                s.push_str(
                    "height  id                timestamp     nonce  txs       objective  sweeps\n",
                );
                for b in &summary.blocks {
                    writeln!(
                        s,
                        "{:>6}  {}  {:>9} {:>9} {:>4} {:>15.6} {:>7}",
                        b.height,
                        &b.id[..16],
                        b.timestamp,
                        b.nonce,
                        b.transactions,
                        b.objective,
                        b.sa_sweeps
                    )
                    .unwrap();
                }
                s
            })
        }
    }
}
