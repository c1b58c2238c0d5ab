//! Optimization instances: coupling matrices, QUBO/QCO and Ising/XY objectives,
//! random generators, file I/O and exhaustive oracles.

mod eval;
mod generate;
mod io;
mod local;
mod matrix;
mod oracle;

use thiserror::Error;

pub use eval::{evaluate_qco, evaluate_qubo, ising_energy, xy_energy};
pub use generate::{nonzero_count, random_instance, InstanceSpec};
pub use io::InstanceFile;
pub use local::{polish_phases, polish_spins};
pub use matrix::{
    normalize_angle, upper_triangle_len, upper_triangle_pair, Coupling, CouplingMatrix, Mode,
    PhaseVector, SpinVector,
};
pub use oracle::{brute_force_qubo, grid_search_qco, BRUTE_FORCE_MAX_N, GRID_SEARCH_BUDGET};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid entry index ({i}, {j}) for n = {n}; need i < j < n")]
    InvalidIndex { i: usize, j: usize, n: usize },
    #[error("duplicate entry ({i}, {j})")]
    DuplicateEntry { i: usize, j: usize },
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("spin values must be -1 or +1, got {0}")]
    InvalidSpin(i8),
    #[error("invalid coupling range [{j_min}, {j_max}]")]
    InvalidRange { j_min: f64, j_max: f64 },
    #[error("value {value} outside declared range [{j_min}, {j_max}]")]
    OutOfRange { value: f64, j_min: f64, j_max: f64 },
    #[error("invalid instance spec: {0}")]
    InvalidSpec(String),
    #[error("exhaustive search capped at n = {max}, got n = {n}")]
    TooLarge { n: usize, max: usize },
    #[error("grid search over k = {k} phases for n = {n} nodes exceeds budget of {budget} configurations")]
    BudgetExceeded { n: usize, k: usize, budget: u64 },
    #[error("grid resolution must be at least 1, got {0}")]
    InvalidGrid(usize),
    #[error("parse error: {0}")]
    Parse(String),
}
