use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::Context;
use clap::Args;
use hamchain_core::baselines::{sa_qco, sa_qubo};
use hamchain_core::gdsim::{solve_qco, solve_qubo, SteadyStateReport};
use hamchain_core::problem::{
    brute_force_qubo, grid_search_qco, ising_energy, random_instance, xy_energy, InstanceFile,
    InstanceSpec, Mode, ProblemError,
};
use serde::Serialize;

use crate::{Ctx, SolverChoice, Usage};

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Node count.
    #[arg(long)]
    n: Option<usize>,
    /// Percentage of nonzero upper-triangle couplings.
    #[arg(long)]
    density: Option<f64>,
    /// Lower end of the coupling range.
    #[arg(long, allow_hyphen_values = true)]
    j_min: Option<f64>,
    /// Upper end of the coupling range.
    #[arg(long, allow_hyphen_values = true)]
    j_max: Option<f64>,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Instance file written by `gen`.
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "sa")]
    solver: SolverChoice,
    /// `qubo` (spins) or `qco` (phases).
    #[arg(long, default_value = "qubo")]
    mode: Mode,
    /// Phase levels per node for the grid solver.
    #[arg(long, default_value_t = 16)]
    grid_k: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Instance sizes, all at most 24 so the exact optimum is known.
    #[arg(long, value_delimiter = ',', default_values_t = [8_usize, 12, 16])]
    sizes: Vec<usize>,
    /// Instances per size.
    #[arg(long, default_value_t = 4)]
    instances: u64,
    /// Adds wall-clock columns, which makes the output vary between runs.
    #[arg(long)]
    timings: bool,
}

fn read_instance(path: &PathBuf) -> anyhow::Result<InstanceFile> {
    let f = File::open(path).map_err(|e| Usage(format!("cannot open {}: {e}", path.display())))?;
    InstanceFile::read_from(BufReader::new(f))
        .map_err(|e| Usage(format!("{}: {e}", path.display())).into())
}

pub fn gen(ctx: &Ctx, a: GenArgs) -> anyhow::Result<()> {
    let base = &ctx.cfg.instance;
    let spec = InstanceSpec {
        n: a.n.unwrap_or(base.n),
        density_pct: a.density.unwrap_or(base.density_pct),
        j_min: a.j_min.unwrap_or(base.j_min),
        j_max: a.j_max.unwrap_or(base.j_max),
        seed: base.seed,
    };
    let q = random_instance(&spec).map_err(|e| Usage(e.to_string()))?;
    let file = InstanceFile::new(q, spec.j_min, spec.j_max)?;
    match &a.out {
        Some(path) => {
            file.write_to(
                File::create(path).with_context(|| format!("creating {}", path.display()))?,
            )?;
            #[derive(Serialize)]
            struct Written<'a> {
                path: &'a PathBuf,
                n: usize,
                nonzeros: usize,
                digest: String,
            }
            let w = Written {
                path,
                n: spec.n,
                nonzeros: file.matrix.nnz(),
                digest: hex::encode(file.matrix.digest()),
            };
            ctx.emit(&w, || {
                format!(
                    "wrote {} (n = {}, {} couplings)\n",
                    path.display(),
                    w.n,
                    w.nonzeros
                )
            })
        }
        None => crate::write_stdout(&file.to_text()),
    }
}

#[derive(Debug, Serialize)]
struct Solved {
    solver: &'static str,
    mode: Mode,
    n: usize,
    objective: f64,
    /// Ising energy for QUBO, XY energy for QCO.
    energy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    spins: Option<Vec<i8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phases: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<SteadyStateReport>,
}

fn cap_error(e: ProblemError) -> anyhow::Error {
    match e {
        ProblemError::TooLarge { .. }
        | ProblemError::BudgetExceeded { .. }
        | ProblemError::InvalidGrid(_) => Usage(e.to_string()).into(),
        other => other.into(),
    }
}

pub fn solve(ctx: &Ctx, a: SolveArgs) -> anyhow::Result<()> {
    let inst = read_instance(&a.instance)?;
    let q = &inst.matrix;
    let (gd, sa) = (&ctx.cfg.gd, &ctx.cfg.sa);
    let mut out = Solved {
        solver: match a.solver {
            SolverChoice::Gdsim => "gdsim",
            SolverChoice::Sa => "sa",
            SolverChoice::Brute => "brute",
            SolverChoice::Grid => "grid",
        },
        mode: a.mode,
        n: q.n(),
        objective: 0.0,
        energy: 0.0,
        spins: None,
        phases: None,
        report: None,
    };
    match (a.mode, a.solver) {
        (Mode::Qubo, SolverChoice::Grid) => {
            return Err(Usage("the grid solver handles --mode qco only".into()).into())
        }
        (Mode::Qco, SolverChoice::Brute) => {
            return Err(Usage("the brute solver handles --mode qubo only".into()).into())
        }
        (Mode::Qubo, solver) => {
            let (s, v) = match solver {
                SolverChoice::Brute => brute_force_qubo(q).map_err(cap_error)?,
                SolverChoice::Sa => sa_qubo(q, sa)?,
                _ => {
                    let (s, v, report) = solve_qubo(q, gd)?;
                    out.report = Some(report);
                    (s, v)
                }
            };
            out.objective = v;
            out.energy = ising_energy(q, &s)?;
            out.spins = Some(s.as_slice().to_vec());
        }
        (Mode::Qco, solver) => {
            let (t, v) = match solver {
                SolverChoice::Grid => grid_search_qco(q, a.grid_k).map_err(cap_error)?,
                SolverChoice::Sa => sa_qco(q, sa)?,
                _ => {
                    let (t, report) = solve_qco(q, gd)?;
                    out.report = Some(report);
                    let v = hamchain_core::problem::evaluate_qco(q, &t)?;
                    (t, v)
                }
            };
            out.objective = v;
            out.energy = xy_energy(q, &t)?;
            out.phases = Some(t.as_slice().to_vec());
        }
    }
    ctx.emit(&out, || {
        let mut s = format!(
            "solver {} mode {} n {}\nobjective {}\nenergy {}\n",
            out.solver, out.mode, out.n, out.objective, out.energy
        );
        if let Some(spins) = &out.spins {
            let line: String = spins
                .iter()
                .map(|&x| if x > 0 { '+' } else { '-' })
                .collect();
            writeln!(s, "spins {line}").unwrap();
        }
        if let Some(phases) = &out.phases {
            let parts: Vec<String> = phases.iter().map(|p| format!("{p:.6}")).collect();
            writeln!(s, "phases {}", parts.join(" ")).unwrap();
        }
        if let Some(r) = &out.report {
            writeln!(s, "converged {} steps {}", r.converged, r.steps).unwrap();
        }
        s
    })
}

#[derive(Debug, Serialize)]
struct BenchRow {
    n: usize,
    seed: u64,
    optimum: f64,
    sa: f64,
    gdsim: f64,
    gdsim_steps: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    sa_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gdsim_ms: Option<f64>,
}

pub fn bench(ctx: &Ctx, a: BenchArgs) -> anyhow::Result<()> {
    if let Some(&n) = a.sizes.iter().find(|&&n| !(2..=24).contains(&n)) {
        return Err(Usage(format!("bench sizes must lie in 2..=24, got {n}")).into());
    }
    let mut rows = Vec::new();
    for &n in &a.sizes {
        for k in 0..a.instances {
            let seed = ctx.cfg.seed.wrapping_add(k);
            let spec = InstanceSpec {
                n,
                seed,
                ..ctx.cfg.instance.clone()
            };
            let q = random_instance(&spec).map_err(|e| Usage(e.to_string()))?;
            let (_, optimum) = brute_force_qubo(&q)?;
            let t0 = Instant::now();
            let (_, sa) = sa_qubo(
                &q,
                &hamchain_core::SaParams {
                    seed,
                    ..ctx.cfg.sa.clone()
                },
            )?;
            let sa_ms = t0.elapsed().as_secs_f64() * 1e3;
            let t1 = Instant::now();
            let (_, gdsim, report) = solve_qubo(
                &q,
                &hamchain_core::GdParams {
                    seed,
                    ..ctx.cfg.gd.clone()
                },
            )?;
            let gd_ms = t1.elapsed().as_secs_f64() * 1e3;
            rows.push(BenchRow {
                n,
                seed,
                optimum,
                sa,
                gdsim,
                gdsim_steps: report.steps,
                sa_ms: a.timings.then_some(sa_ms),
                gdsim_ms: a.timings.then_some(gd_ms),
            });
        }
    }
    ctx.emit(&rows, || {
        let hit = |v: f64, o: f64| (v - o).abs() <= 1e-9 * (1.0 + o.abs());
        let mut s = String::from("    n   seed     optimum          sa     gdsim  gd steps");
        if a.timings {
            s.push_str("     sa ms  gdsim ms");
        }
        s.push('\n');
        for r in &rows {
            write!(
                s,
                "{:>5} {:>6} {:>11.6} {:>11.6} {:>9.4} {:>9}",
                r.n, r.seed, r.optimum, r.sa, r.gdsim, r.gdsim_steps
            )
            .unwrap();
            if let (Some(x), Some(y)) = (r.sa_ms, r.gdsim_ms) {
                write!(s, " {x:>9.2} {y:>9.2}").unwrap();
            }
            s.push('\n');
        }
        let total = rows.len();
        let sa_hits = rows.iter().filter(|r| hit(r.sa, r.optimum)).count();
        let gd_hits = rows.iter().filter(|r| hit(r.gdsim, r.optimum)).count();
        writeln!(
            s,
            "exact optimum: sa {sa_hits}/{total}, gdsim {gd_hits}/{total}"
        )
        .unwrap();
        s
    })
}
