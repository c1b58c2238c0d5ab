//! Simulated gain-dissipative oscillator network.
//!
//! Each node is a complex amplitude `ψ_i` pumped with gain `γ_i`, saturated by
//! the nonlinear loss `σ|ψ_i|²` and coupled linearly to its neighbours. The gain
//! ramps up slowly from below threshold; per-node pump feedback keeps the
//! densities equal, so that the phases relax along the XY energy and the
//! condensate settles at a local maximizer of the QCO objective.

mod dynamics;
mod waveform;

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::{
    polish_phases, polish_spins, CouplingMatrix, PhaseVector, ProblemError, SpinVector,
};
use crate::rng;

pub use dynamics::{
    complex_drift, complex_euler_step, equal_density_phase_step, polar_euler_step, polar_rates,
    pump_feedback, Integrator, OscillatorState,
};
pub use waveform::WaveformSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GdError {
    #[error("invalid simulator parameters: {0}")]
    InvalidParams(String),
    #[error("state has {actual} nodes, instance has {expected}")]
    Dimension { expected: usize, actual: usize },
    #[error("state became non-finite at step {step}")]
    NonFinite { step: u64 },
    #[error("invalid waveform geometry: {0}")]
    Waveform(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Simulator configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GdParams {
    /// Nonlinear loss `σ`.
    pub sigma: f64,
    /// Self-interaction `U`.
    pub u: f64,
    /// Per-node blueshift; empty means all zero.
    pub v: Vec<f64>,
    /// Gain at which the ramp starts. Clamped further down when needed so
    /// the run always begins below threshold.
    pub gamma0: f64,
    /// Ramp ceiling.
    pub gamma_max: f64,
    pub ramp_rate: f64,
    pub dt: f64,
    pub noise_rho: f64,
    pub noise_theta: f64,
    /// Steady state requires `|ρ̇_i| < density_tol · ρ̄` for every node.
    pub density_tol: f64,
    /// Steady state requires `max θ̇ − min θ̇ < phase_rate_tol`.
    pub phase_rate_tol: f64,
    pub max_steps: u64,
    pub feedback_gain: f64,
    /// Independent runs from different random initial phases; the best
    /// objective wins.
    pub restarts: u32,
    pub seed: u64,
}

impl Default for GdParams {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            u: 0.0,
            v: Vec::new(),
            gamma0: 0.0,
            gamma_max: 1.0,
            ramp_rate: 0.05,
            dt: 0.01,
            noise_rho: 1e-1,
            noise_theta: 1e-1,
            density_tol: 1e-4,
            phase_rate_tol: 1e-4,
            max_steps: 200_000,
            feedback_gain: 0.5,
            restarts: 4,
            seed: 0,
        }
    }
}

impl GdParams {
    pub fn validate(&self, n: usize) -> Result<(), GdError> {
        let bad = |msg: &str| Err(GdError::InvalidParams(msg.to_string()));
        let reals = [
            self.sigma,
            self.u,
            self.gamma0,
            self.gamma_max,
            self.ramp_rate,
            self.dt,
            self.noise_rho,
            self.noise_theta,
            self.density_tol,
            self.phase_rate_tol,
            self.feedback_gain,
        ];
        if reals.iter().chain(&self.v).any(|x| !x.is_finite()) {
            return bad("all parameters must be finite");
        }
        if self.sigma <= 0.0 {
            return bad("sigma must be positive");
        }
        if self.dt <= 0.0 {
            return bad("dt must be positive");
        }
        if self.density_tol <= 0.0 || self.phase_rate_tol <= 0.0 {
            return bad("tolerances must be positive");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1");
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1");
        }
        if self.u < 0.0 || self.ramp_rate < 0.0 || self.feedback_gain < 0.0 {
            return bad("u, ramp_rate and feedback_gain must be non-negative");
        }
        if self.noise_rho < 0.0 || self.noise_theta < 0.0 {
            return bad("noise amplitudes must be non-negative");
        }
        if !self.v.is_empty() && self.v.len() != n {
            return Err(GdError::InvalidParams(format!(
                "blueshift has {} entries, instance has {n} nodes",
                self.v.len()
            )));
        }
        Ok(())
    }

    pub(crate) fn blueshift(&self, i: usize) -> f64 {
        self.v.get(i).copied().unwrap_or(0.0)
    }

    /// Where the gain ramp begins for instance `q`: `gamma0`, lowered if
    /// necessary below `−max_i Σ_j |J_ij|` so no mode is above threshold yet.
    pub fn ramp_start(&self, q: &CouplingMatrix) -> f64 {
        self.gamma0
            .min(-q.max_abs_row_sum() - 0.1)
            .min(self.gamma_max)
    }
}

/// Diagnostics of a single simulator run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateReport {
    pub converged: bool,
    pub steps: u64,
    /// Common phase rotation rate.
    pub mu: f64,
    pub max_density_residual: f64,
    pub density_spread: f64,
    pub phase_rate_spread: f64,
}

const INITIAL_AMPLITUDE: f64 = 1e-2;

/// Runs one trajectory from seeded initial phases, calling `observe` after
/// every step.
pub fn run(
    q: &CouplingMatrix,
    p: &GdParams,
    seed: u64,
    mut observe: impl FnMut(&OscillatorState),
) -> Result<(OscillatorState, SteadyStateReport), GdError> {
    p.validate(q.n())?;
    let start = p.ramp_start(q);
    let mut state = OscillatorState::seeded(q.n(), INITIAL_AMPLITUDE, start, seed);
    let mut integ = Integrator::new(q, p, start, rng::derive_seed(seed, 1))?;
    observe(&state);
    let mut report = SteadyStateReport {
        converged: false,
        steps: 0,
        mu: 0.0,
        max_density_residual: f64::INFINITY,
        density_spread: state.density_spread(),
        phase_rate_spread: f64::INFINITY,
    };
    if q.n() == 0 {
        report.converged = true;
        report.max_density_residual = 0.0;
        report.phase_rate_spread = 0.0;
        return Ok((state, report));
    }
    while integ.steps() < p.max_steps {
        integ.step(&mut state)?;
        pump_feedback(&mut state, p);
        observe(&state);
        if !integ.ramp_done() {
            continue;
        }
        let (rho_dot, theta_dot) = integ.rates(&state);
        let mean = state.mean_density();
        report.max_density_residual = rho_dot.iter().fold(0.0, |m, r| m.max(r.abs()));
        report.phase_rate_spread = dynamics::spread(theta_dot.iter().copied());
        report.mu = theta_dot.iter().sum::<f64>() / theta_dot.len() as f64;
        if report.max_density_residual < p.density_tol * mean
            && report.phase_rate_spread < p.phase_rate_tol
        {
            report.converged = true;
            break;
        }
    }
    report.steps = integ.steps();
    report.density_spread = state.density_spread();
    Ok((state, report))
}

/// Multi-start QCO solve. The phases of the best restart are polished by
/// coordinate ascent and rotated so that `θ_0 = 0`.
///
/// The report belongs to the winning restart; non-convergence is flagged
/// there rather than returned as an error.
pub fn solve_qco(
    q: &CouplingMatrix,
    p: &GdParams,
) -> Result<(PhaseVector, SteadyStateReport), GdError> {
    let mut best: Option<(f64, PhaseVector, SteadyStateReport)> = None;
    for r in 0..p.restarts {
        let (state, report) = run(q, p, rng::derive_seed(p.seed, u64::from(r)), |_| {})?;
        let mut theta = PhaseVector::new(state.phases())?.anchored();
        let value = polish_phases(q, &mut theta)?;
        let theta = theta.anchored();
        if best.as_ref().is_none_or(|b| value > b.0) {
            best = Some((value, theta, report));
        }
    }
    let (_, theta, report) = best.expect("restarts >= 1 checked by validate");
    Ok((theta, report))
}

/// Multi-start QUBO solve: every restart's phases are projected to spins with
/// `s_i = sign(cos θ_i)` and polished by single flips; the best objective wins.
pub fn solve_qubo(
    q: &CouplingMatrix,
    p: &GdParams,
) -> Result<(SpinVector, f64, SteadyStateReport), GdError> {
    let mut best: Option<(f64, SpinVector, SteadyStateReport)> = None;
    for r in 0..p.restarts {
        let (state, report) = run(q, p, rng::derive_seed(p.seed, u64::from(r)), |_| {})?;
        let mut spins = SpinVector::from_phases(&PhaseVector::new(state.phases())?);
        let value = polish_spins(q, &mut spins)?;
        if best.as_ref().is_none_or(|b| value > b.0) {
            best = Some((value, spins, report));
        }
    }
    let (value, spins, report) = best.expect("restarts >= 1 checked by validate");
    Ok((spins, value, report))
}

/// Writes one trajectory as CSV rows `t,i,rho,theta,gamma_eff`, keeping every
/// `stride`-th step.
pub fn write_trajectory(
    q: &CouplingMatrix,
    p: &GdParams,
    stride: u64,
    mut out: impl Write,
) -> Result<SteadyStateReport, TrajectoryError> {
    writeln!(out, "t,i,rho,theta,gamma_eff")?;
    let stride = stride.max(1);
    let mut k = 0_u64;
    let mut io_err = None;
    let (_, report) = run(q, p, rng::derive_seed(p.seed, 0), |s| {
        if k.is_multiple_of(stride) && io_err.is_none() {
            for i in 0..s.n() {
                let row = writeln!(
                    out,
                    "{},{},{},{},{}",
                    s.t,
                    i,
                    s.psi[i].norm_sqr(),
                    s.psi[i].arg(),
                    s.gamma_eff[i]
                );
                if let Err(e) = row {
                    io_err = Some(e);
                    break;
                }
            }
        }
        k += 1;
    })?;
    match io_err {
        Some(e) => Err(e.into()),
        None => Ok(report),
    }
}

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Sim(#[from] GdError),
}
