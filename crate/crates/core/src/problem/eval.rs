//! Objective functions.
//!
//! All four objectives share the same two fixed-order sums: the trace (diagonal
//! in index order) and the off-diagonal pair sum over stored entries in
//! row-major order. `cos` comes from `libm` so the QCO value is reproducible
//! across platforms, which the protocol relies on for exact-match verification.

use super::{CouplingMatrix, PhaseVector, ProblemError, SpinVector};

/// `Σ_{i<j} Q_ij s_i s_j`.
fn spin_pair_sum(q: &CouplingMatrix, s: &[i8]) -> f64 {
    q.entries()
        .iter()
        .map(|e| e.value * f64::from(s[e.i] * s[e.j]))
        .sum()
}

/// `Σ_{i<j} Q_ij cos(θ_i − θ_j)`.
fn phase_pair_sum(q: &CouplingMatrix, t: &[f64]) -> f64 {
    q.entries()
        .iter()
        .map(|e| e.value * libm::cos(t[e.i] - t[e.j]))
        .sum()
}

/// QUBO objective `zᵀQz = Σ Q_ii + 2 Σ_{i<j} Q_ij s_i s_j`.
pub fn evaluate_qubo(q: &CouplingMatrix, s: &SpinVector) -> Result<f64, ProblemError> {
    q.check_len(s.len())?;
    Ok(q.trace() + 2.0 * spin_pair_sum(q, s.as_slice()))
}

/// QCO objective `z^H Q z = Σ Q_ii + 2 Σ_{i<j} Q_ij cos(θ_i − θ_j)`.
pub fn evaluate_qco(q: &CouplingMatrix, theta: &PhaseVector) -> Result<f64, ProblemError> {
    q.check_len(theta.len())?;
    Ok(q.trace() + 2.0 * phase_pair_sum(q, theta.as_slice()))
}

/// Ising energy `−Σ_{i<j} J_ij s_i s_j`.
pub fn ising_energy(q: &CouplingMatrix, s: &SpinVector) -> Result<f64, ProblemError> {
    q.check_len(s.len())?;
    Ok(-spin_pair_sum(q, s.as_slice()))
}

/// XY energy `−Σ_{i<j} J_ij cos(θ_i − θ_j)`.
pub fn xy_energy(q: &CouplingMatrix, theta: &PhaseVector) -> Result<f64, ProblemError> {
    q.check_len(theta.len())?;
    Ok(-phase_pair_sum(q, theta.as_slice()))
}
