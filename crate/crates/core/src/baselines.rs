//! Simulated annealing for QUBO and QCO.
//!
//! These are the classical competitors and, through [`baseline_threshold`], the
//! verifier's reference solver. Everything that influences the result is
//! integer RNG output or `libm` arithmetic in a fixed order, so two machines
//! running the same budget on the same instance obtain the same value bit for
//! bit.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::{
    evaluate_qco, normalize_angle, polish_phases, polish_spins, CouplingMatrix, Mode, PhaseVector,
    ProblemError, SpinVector,
};
use crate::rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SaError {
    #[error("invalid annealing parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Annealing budget and schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaParams {
    pub sweeps: u64,
    pub temp_hi: f64,
    pub temp_lo: f64,
    pub restarts: u32,
    pub seed: u64,
}

impl Default for SaParams {
    fn default() -> Self {
        Self {
            sweeps: 1000,
            temp_hi: 2.0,
            temp_lo: 0.02,
            restarts: 4,
            seed: 0,
        }
    }
}

impl SaParams {
    pub fn validate(&self) -> Result<(), SaError> {
        if !(self.temp_hi.is_finite()
            && self.temp_lo.is_finite()
            && self.temp_hi > self.temp_lo
            && self.temp_lo > 0.0)
        {
            return Err(SaError::InvalidParams(format!(
                "need temp_hi > temp_lo > 0, got {} and {}",
                self.temp_hi, self.temp_lo
            )));
        }
        if self.restarts == 0 {
            return Err(SaError::InvalidParams("restarts must be at least 1".into()));
        }
        Ok(())
    }

    /// Temperature of sweep `k`: geometric from `temp_hi` down to `temp_lo`.
    pub fn temperature(&self, k: u64) -> f64 {
        if self.sweeps <= 1 {
            return self.temp_lo;
        }
        let frac = k as f64 / (self.sweeps - 1) as f64;
        self.temp_hi * libm::pow(self.temp_lo / self.temp_hi, frac)
    }
}

/// Width of the improvement band below which the running best is not
/// replaced; keeps incremental rounding from deciding between equal states.
fn band(q: &CouplingMatrix) -> f64 {
    1e-9 * (1.0 + q.offdiag_l1())
}

fn metropolis(rng: &mut ChaCha8Rng, gain: f64, temp: f64) -> bool {
    gain >= 0.0 || rng.random::<f64>() < libm::exp(gain / temp)
}

fn anneal_spins(q: &CouplingMatrix, adj: &[Vec<(usize, f64)>], p: &SaParams, seed: u64) -> Vec<i8> {
    let n = q.n();
    let mut rng = rng::seeded(seed);
    let mut s: Vec<i8> = (0..n)
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect();
    let mut field: Vec<f64> = adj
        .iter()
        .map(|row| row.iter().map(|&(j, v)| v * f64::from(s[j])).sum())
        .collect();
    let band = band(q);
    let mut current = 0.0;
    let mut best_value = 0.0;
    let mut best = s.clone();
    for k in 0..p.sweeps {
        let temp = p.temperature(k);
        for i in 0..n {
            let old = f64::from(s[i]);
            let gain = -4.0 * old * field[i];
            if metropolis(&mut rng, gain, temp) {
                s[i] = -s[i];
                for &(j, v) in &adj[i] {
                    field[j] -= 2.0 * v * old;
                }
                current += gain;
                if current > best_value + band {
                    best_value = current;
                    best.copy_from_slice(&s);
                }
            }
        }
    }
    best
}

/// Metropolis single-flip annealing maximizing `zᵀQz`. The best state of each
/// restart is polished by single flips; the best restart wins, ties going to
/// the lowest restart index. `sweeps = 0` returns the polished random start.
pub fn sa_qubo(q: &CouplingMatrix, p: &SaParams) -> Result<(SpinVector, f64), SaError> {
    p.validate()?;
    let adj = q.adjacency();
    let mut best: Option<(SpinVector, f64)> = None;
    for r in 0..p.restarts {
        let mut s = SpinVector(anneal_spins(
            q,
            &adj,
            p,
            rng::derive_seed(p.seed, u64::from(r)),
        ));
        let value = polish_spins(q, &mut s)?;
        if best.as_ref().is_none_or(|b| value > b.1) {
            best = Some((s, value));
        }
    }
    Ok(best.expect("restarts >= 1"))
}

/// Standard normal deviate by Box–Muller from two uniforms.
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = 1.0 - rng.random::<f64>();
    let u2 = rng.random::<f64>();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(TAU * u2)
}

fn anneal_phases(
    q: &CouplingMatrix,
    adj: &[Vec<(usize, f64)>],
    p: &SaParams,
    seed: u64,
) -> Vec<f64> {
    let n = q.n();
    let mut rng = rng::seeded(seed);
    let mut t: Vec<f64> = (0..n).map(|_| TAU * rng.random::<f64>()).collect();
    let band = band(q);
    let mut current = 0.0;
    let mut best_value = 0.0;
    let mut best = t.clone();
    for k in 0..p.sweeps {
        let temp = p.temperature(k);
        let width = PI * temp / p.temp_hi;
        for i in 0..n {
            let proposal = normalize_angle(t[i] + width * gaussian(&mut rng));
            let gain: f64 = 2.0
                * adj[i]
                    .iter()
                    .map(|&(j, v)| v * (libm::cos(proposal - t[j]) - libm::cos(t[i] - t[j])))
                    .sum::<f64>();
            if metropolis(&mut rng, gain, temp) {
                t[i] = proposal;
                current += gain;
                if current > best_value + band {
                    best_value = current;
                    best.copy_from_slice(&t);
                }
            }
        }
    }
    best
}

/// Continuous analogue of [`sa_qubo`]: Gaussian phase moves whose width
/// shrinks with temperature, then coordinate-ascent polish. Returned phases
/// are rotated so `θ_0 = 0`.
pub fn sa_qco(q: &CouplingMatrix, p: &SaParams) -> Result<(PhaseVector, f64), SaError> {
    p.validate()?;
    let adj = q.adjacency();
    let mut best: Option<(PhaseVector, f64)> = None;
    for r in 0..p.restarts {
        let mut t = PhaseVector(anneal_phases(
            q,
            &adj,
            p,
            rng::derive_seed(p.seed, u64::from(r)),
        ));
        polish_phases(q, &mut t)?;
        let t = t.anchored();
        let value = evaluate_qco(q, &t)?;
        if best.as_ref().is_none_or(|b| value > b.1) {
            best = Some((t, value));
        }
    }
    Ok(best.expect("restarts >= 1"))
}

/// Seed the verifier uses for instance `q`: the first eight digest bytes,
/// big-endian.
pub fn instance_seed(q: &CouplingMatrix) -> u64 {
    let d = q.digest();
    u64::from_be_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

/// Deterministic verifier threshold: the annealing value under `budget` with
/// the seed replaced by [`instance_seed`].
pub fn baseline_threshold(
    q: &CouplingMatrix,
    budget: &SaParams,
    mode: Mode,
) -> Result<f64, SaError> {
    let p = SaParams {
        seed: instance_seed(q),
        ..budget.clone()
    };
    Ok(match mode {
        Mode::Qubo => sa_qubo(q, &p)?.1,
        Mode::Qco => sa_qco(q, &p)?.1,
    })
}
