//! Proof of work by optimization.
//!
//! A block's header and transactions are hashed into a sparse coupling
//! matrix. The miner must present a configuration whose objective on that
//! matrix beats a deterministic annealing baseline by the target's margin;
//! the encoded configuration then becomes part of the block's identity.

mod consensus;
mod difficulty;
mod instance;
mod solution;
mod wire;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::baselines::{SaError, SaParams};
use crate::gdsim::GdError;
use crate::problem::{nonzero_count, Mode, ProblemError};

pub use consensus::{
    genesis_block, mine, required_objective, verify, verify_genesis, BaselineSolver, GdSolver,
    MinedBlock, RejectReason, SaSolver, Solver, Verified, BLOCK_VERSION, GENESIS_PAYLOAD,
};
pub use difficulty::{adjust_difficulty, retarget_factor};
pub use instance::{
    build_coupling_matrix, entry_positions, h0_map, position_seed, value_sources, BlockContent,
    ValueSource,
};
pub use solution::{dequantize_phase, quantize_phase, Configuration, Solution, PHASE_LEVELS};
pub use wire::{decode_block, encode_block, HEADER_LEN, TARGET_LEN};

pub type Hash32 = [u8; 32];

pub fn sha256(data: &[u8]) -> Hash32 {
    Sha256::digest(data).into()
}

/// Largest accepted transaction payload, in bytes.
pub const MAX_PAYLOAD: usize = 1024;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PowError {
    #[error("invalid difficulty target: {0}")]
    InvalidTarget(String),
    #[error("block has no transactions")]
    EmptyBlock,
    #[error("invalid transaction: {0}")]
    InvalidTransaction(String),
    #[error("malformed encoding: {0}")]
    Decode(String),
    #[error("no nonce up to {max_nonce} met the threshold")]
    NonceExhausted { max_nonce: u32 },
    #[error("invalid difficulty history: {0}")]
    InvalidHistory(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Anneal(#[from] SaError),
    #[error(transparent)]
    Simulator(#[from] GdError),
}

/// An opaque payload and its digest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    payload: Vec<u8>,
    txid: Hash32,
}

impl Transaction {
    pub fn new(payload: impl Into<Vec<u8>>) -> Result<Self, PowError> {
        let payload = payload.into();
        if payload.is_empty() || payload.len() > MAX_PAYLOAD {
            return Err(PowError::InvalidTransaction(format!(
                "payload length {} outside 1..={MAX_PAYLOAD}",
                payload.len()
            )));
        }
        let txid = sha256(&payload);
        Ok(Self { payload, txid })
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    pub fn txid(&self) -> &Hash32 {
        &self.txid
    }
}

/// Binary hash tree over transaction ids; an odd level repeats its last node.
pub fn merkle_root(txs: &[Transaction]) -> Result<Hash32, PowError> {
    if txs.is_empty() {
        return Err(PowError::EmptyBlock);
    }
    let mut level: Vec<Hash32> = txs.iter().map(|t| t.txid).collect();
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|c| {
                let right = c.get(1).unwrap_or(&c[0]);
                let mut h = Sha256::new();
                h.update(c[0]);
                h.update(right);
                h.finalize().into()
            })
            .collect();
    }
    Ok(level[0])
}

/// The hardness dial carried in every header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DifficultyTarget {
    pub n: u32,
    pub density_pct: f32,
    pub j_min: f64,
    pub j_max: f64,
    pub mode: Mode,
    /// Sweeps of the verifier's annealing baseline.
    pub sa_sweeps: u64,
    /// Required excess over the baseline, in parts per million of its magnitude.
    pub margin_ppm: u64,
}

impl Default for DifficultyTarget {
    fn default() -> Self {
        Self {
            n: 32,
            density_pct: 50.0,
            j_min: -1.0,
            j_max: 1.0,
            mode: Mode::Qubo,
            sa_sweeps: 20,
            margin_ppm: 0,
        }
    }
}

impl DifficultyTarget {
    pub fn validate(&self) -> Result<(), PowError> {
        let bad = |m: String| Err(PowError::InvalidTarget(m));
        if self.n < 8 {
            return bad(format!("n must be at least 8, got {}", self.n));
        }
        if !(self.density_pct.is_finite() && self.density_pct > 0.0 && self.density_pct <= 100.0) {
            return bad(format!(
                "density must be in (0, 100], got {}",
                self.density_pct
            ));
        }
        if !(self.j_min.is_finite() && self.j_max.is_finite() && self.j_min < self.j_max) {
            return bad(format!(
                "coupling range [{}, {}] is empty",
                self.j_min, self.j_max
            ));
        }
        if self.nonzeros() < 1 {
            return bad("target yields no nonzero couplings".into());
        }
        Ok(())
    }

    /// Number of nonzero couplings `m` in each block's matrix.
    pub fn nonzeros(&self) -> usize {
        nonzero_count(self.n as usize, f64::from(self.density_pct))
    }

    /// Annealing budget of the verifier baseline: one run of `sa_sweeps`
    /// sweeps with temperatures scaled to the coupling range.
    pub fn verifier_params(&self) -> SaParams {
        let scale = self.j_min.abs().max(self.j_max.abs());
        SaParams {
            sweeps: self.sa_sweeps,
            temp_hi: 2.0 * scale,
            temp_lo: 0.02 * scale,
            restarts: 1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockHeader {
    pub version: u32,
    pub prev_id: Hash32,
    pub merkle_root: Hash32,
    pub timestamp: u64,
    pub target: DifficultyTarget,
    pub nonce: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub header: BlockHeader,
    pub transactions: Vec<Transaction>,
    pub solution: Solution,
    /// Digest of the serialized header followed by the encoded solution.
    pub block_id: Hash32,
}

impl Block {
    /// Assembles a block and computes its id.
    pub fn new(header: BlockHeader, transactions: Vec<Transaction>, solution: Solution) -> Self {
        let block_id = compute_block_id(&header, &solution);
        Self {
            header,
            transactions,
            solution,
            block_id,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        encode_block(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, PowError> {
        decode_block(bytes)
    }
}

pub fn compute_block_id(header: &BlockHeader, solution: &Solution) -> Hash32 {
    let mut h = Sha256::new();
    h.update(wire::header_bytes(header));
    h.update(&solution.encoded);
    h.finalize().into()
}
