//! Optimization-based proof of work.
//!
//! The crate covers the whole path from coupling matrices to a running
//! network: `problem` defines QUBO and QCO objectives with exact oracles,
//! `gdsim` integrates gain-dissipative oscillator networks, `baselines`
//! holds simulated annealing, `pow` builds block instances and verifies
//! solutions, `ledger` stores and selects chains, and `netsim` simulates
//! miners exchanging blocks over a latency model.

pub mod baselines;
pub mod gdsim;
pub mod ledger;
pub mod netsim;
pub mod pow;
pub mod problem;
pub mod rng;

pub use baselines::{sa_qco, sa_qubo, SaParams};
pub use gdsim::{GdParams, SteadyStateReport};
pub use ledger::{BlockStore, ChainParams, VerifyMode};
pub use netsim::{run_scenario, ScenarioConfig, SimReport};
pub use pow::{Block, BlockHeader, DifficultyTarget, Hash32, Solution, Transaction};
pub use problem::{CouplingMatrix, Mode, PhaseVector, SpinVector};
