//! Mining and verification.

use std::fmt;

use super::{
    build_coupling_matrix, compute_block_id, merkle_root, position_seed, Block, BlockContent,
    BlockHeader, Configuration, DifficultyTarget, Hash32, PowError, Solution, Transaction,
};
use crate::baselines::{baseline_threshold, instance_seed, sa_qco, sa_qubo, SaParams};
use crate::gdsim::{solve_qco, solve_qubo, GdParams};
use crate::problem::{CouplingMatrix, Mode, PhaseVector, SpinVector};

pub const BLOCK_VERSION: u32 = 1;
pub const GENESIS_PAYLOAD: &[u8] = b"genesis";

/// Smallest objective that passes against `threshold`: the threshold raised
/// by `margin_ppm` millionths of its magnitude.
pub fn required_objective(threshold: f64, margin_ppm: u64) -> f64 {
    threshold + threshold.abs() * (margin_ppm as f64 * 1e-6)
}

/// Anything that can propose a configuration for a block's instance.
pub trait Solver {
    fn name(&self) -> &str;

    /// `seed` differs per nonce so stochastic solvers explore afresh.
    fn solve(&self, q: &CouplingMatrix, mode: Mode, seed: u64) -> Result<Configuration, PowError>;
}

/// The simulated gain-dissipative network.
#[derive(Debug, Clone, Default)]
pub struct GdSolver(pub GdParams);

impl Solver for GdSolver {
    fn name(&self) -> &str {
        "gdsim"
    }

    fn solve(&self, q: &CouplingMatrix, mode: Mode, seed: u64) -> Result<Configuration, PowError> {
        let p = GdParams {
            seed,
            ..self.0.clone()
        };
        Ok(match mode {
            Mode::Qubo => Configuration::Spins(solve_qubo(q, &p)?.0),
            Mode::Qco => Configuration::Phases(solve_qco(q, &p)?.0),
        })
    }
}

/// Simulated annealing with a miner-chosen budget.
#[derive(Debug, Clone, Default)]
pub struct SaSolver(pub SaParams);

impl Solver for SaSolver {
    fn name(&self) -> &str {
        "sa"
    }

    fn solve(&self, q: &CouplingMatrix, mode: Mode, seed: u64) -> Result<Configuration, PowError> {
        let p = SaParams {
            seed,
            ..self.0.clone()
        };
        Ok(match mode {
            Mode::Qubo => Configuration::Spins(sa_qubo(q, &p)?.0),
            Mode::Qco => Configuration::Phases(sa_qco(q, &p)?.0),
        })
    }
}

/// Reproduces the verifier's own baseline run, so it ties the threshold.
#[derive(Debug, Clone, Default)]
pub struct BaselineSolver(pub SaParams);

impl Solver for BaselineSolver {
    fn name(&self) -> &str {
        "baseline"
    }

    fn solve(&self, q: &CouplingMatrix, mode: Mode, _seed: u64) -> Result<Configuration, PowError> {
        let p = SaParams {
            seed: instance_seed(q),
            ..self.0.clone()
        };
        Ok(match mode {
            Mode::Qubo => Configuration::Spins(sa_qubo(q, &p)?.0),
            Mode::Qco => Configuration::Phases(sa_qco(q, &p)?.0),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinedBlock {
    pub block: Block,
    /// Nonces tried, the accepted one included.
    pub attempts: u64,
    pub threshold: f64,
}

fn header_template(
    prev_id: Hash32,
    timestamp: u64,
    txs: &[Transaction],
    target: &DifficultyTarget,
) -> Result<BlockHeader, PowError> {
    Ok(BlockHeader {
        version: BLOCK_VERSION,
        prev_id,
        merkle_root: merkle_root(txs)?,
        timestamp,
        target: target.clone(),
        nonce: 0,
    })
}

/// Tries nonces `0..=max_nonce` in order and returns the first block whose
/// quantized objective reaches the required value.
pub fn mine(
    prev_id: Hash32,
    timestamp: u64,
    transactions: Vec<Transaction>,
    target: &DifficultyTarget,
    solver: &dyn Solver,
    max_nonce: u32,
) -> Result<MinedBlock, PowError> {
    target.validate()?;
    let mut header = header_template(prev_id, timestamp, &transactions, target)?;
    let budget = target.verifier_params();
    for nonce in 0..=max_nonce {
        header.nonce = nonce;
        let q = build_coupling_matrix(BlockContent {
            header: &header,
            transactions: &transactions,
        })?;
        let threshold = baseline_threshold(&q, &budget, target.mode)?;
        let seed = u64::from_le_bytes(position_seed(&header)[..8].try_into().expect("32 bytes"));
        let config = solver.solve(&q, target.mode, seed)?;
        let solution = Solution::from_configuration(&q, &config)?;
        if solution.claimed_objective >= required_objective(threshold, target.margin_ppm) {
            return Ok(MinedBlock {
                block: Block::new(header, transactions, solution),
                attempts: u64::from(nonce) + 1,
                threshold,
            });
        }
    }
    Err(PowError::NonceExhausted { max_nonce })
}

/// Why a block was refused. Checks run in the order the variants are listed.
#[derive(Debug, Clone, PartialEq)]
pub enum RejectReason {
    UnsupportedVersion(u32),
    PrevMismatch,
    TargetMismatch,
    EmptyBlock,
    MerkleMismatch,
    ModeMismatch,
    MalformedSolution(String),
    ObjectiveMismatch { claimed: f64, recomputed: f64 },
    BelowThreshold { objective: f64, required: f64 },
    BlockIdMismatch,
}

impl RejectReason {
    /// Stable short name, used in logs and test tallies.
    pub fn code(&self) -> &'static str {
        match self {
            RejectReason::UnsupportedVersion(_) => "unsupported-version",
            RejectReason::PrevMismatch => "prev-mismatch",
            RejectReason::TargetMismatch => "target-mismatch",
            RejectReason::EmptyBlock => "empty-block",
            RejectReason::MerkleMismatch => "merkle-mismatch",
            RejectReason::ModeMismatch => "mode-mismatch",
            RejectReason::MalformedSolution(_) => "malformed-solution",
            RejectReason::ObjectiveMismatch { .. } => "objective-mismatch",
            RejectReason::BelowThreshold { .. } => "below-threshold",
            RejectReason::BlockIdMismatch => "block-id-mismatch",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::UnsupportedVersion(v) => write!(f, "unsupported block version {v}"),
            RejectReason::PrevMismatch => f.write_str("previous block id does not match parent"),
            RejectReason::TargetMismatch => {
                f.write_str("difficulty target differs from the expected one")
            }
            RejectReason::EmptyBlock => f.write_str("block has no transactions"),
            RejectReason::MerkleMismatch => f.write_str("merkle root does not match transactions"),
            RejectReason::ModeMismatch => f.write_str("solution mode differs from target mode"),
            RejectReason::MalformedSolution(m) => write!(f, "malformed solution: {m}"),
            RejectReason::ObjectiveMismatch {
                claimed,
                recomputed,
            } => {
                write!(
                    f,
                    "claimed objective {claimed:e} differs from recomputed {recomputed:e}"
                )
            }
            RejectReason::BelowThreshold {
                objective,
                required,
            } => {
                write!(f, "objective {objective} below required {required}")
            }
            RejectReason::BlockIdMismatch => {
                f.write_str("block id does not match header and solution")
            }
        }
    }
}

impl std::error::Error for RejectReason {}

/// Facts established by a successful verification.
#[derive(Debug, Clone, PartialEq)]
pub struct Verified {
    pub objective: f64,
    pub threshold: f64,
}

fn structural(
    block: &Block,
    parent_id: &Hash32,
    target: &DifficultyTarget,
) -> Result<(CouplingMatrix, f64), RejectReason> {
    let h = &block.header;
    if h.version != BLOCK_VERSION {
        return Err(RejectReason::UnsupportedVersion(h.version));
    }
    if &h.prev_id != parent_id {
        return Err(RejectReason::PrevMismatch);
    }
    if &h.target != target || target.validate().is_err() {
        return Err(RejectReason::TargetMismatch);
    }
    match merkle_root(&block.transactions) {
        Err(_) => return Err(RejectReason::EmptyBlock),
        Ok(root) if root != h.merkle_root => return Err(RejectReason::MerkleMismatch),
        Ok(_) => {}
    }
    if block.solution.mode != target.mode {
        return Err(RejectReason::ModeMismatch);
    }
    let config = block
        .solution
        .decode(target.n as usize)
        .map_err(|e| RejectReason::MalformedSolution(e.to_string()))?;
    let q = build_coupling_matrix(BlockContent {
        header: h,
        transactions: &block.transactions,
    })
    .map_err(|e| RejectReason::MalformedSolution(e.to_string()))?;
    let recomputed = config
        .objective(&q)
        .map_err(|e| RejectReason::MalformedSolution(e.to_string()))?;
    let claimed = block.solution.claimed_objective;
    if claimed.to_bits() != recomputed.to_bits() {
        return Err(RejectReason::ObjectiveMismatch {
            claimed,
            recomputed,
        });
    }
    Ok((q, recomputed))
}

fn check_id(block: &Block) -> Result<(), RejectReason> {
    if compute_block_id(&block.header, &block.solution) != block.block_id {
        return Err(RejectReason::BlockIdMismatch);
    }
    Ok(())
}

/// Full verification against the parent's id and the target expected at
/// this height.
pub fn verify(
    block: &Block,
    parent_id: &Hash32,
    target: &DifficultyTarget,
) -> Result<Verified, RejectReason> {
    let (q, objective) = structural(block, parent_id, target)?;
    let threshold = baseline_threshold(&q, &target.verifier_params(), target.mode)
        .map_err(|e| RejectReason::MalformedSolution(e.to_string()))?;
    let required = required_objective(threshold, target.margin_ppm);
    if objective < required {
        return Err(RejectReason::BelowThreshold {
            objective,
            required,
        });
    }
    check_id(block)?;
    Ok(Verified {
        objective,
        threshold,
    })
}

/// The fixed first block for `target`: zero parent, timestamp zero, a single
/// `"genesis"` transaction and the all-`+1` (or all-zero phase) solution.
pub fn genesis_block(target: &DifficultyTarget) -> Result<Block, PowError> {
    target.validate()?;
    let txs = vec![Transaction::new(GENESIS_PAYLOAD.to_vec())?];
    let header = header_template([0; 32], 0, &txs, target)?;
    let q = build_coupling_matrix(BlockContent {
        header: &header,
        transactions: &txs,
    })?;
    let n = target.n as usize;
    let config = match target.mode {
        Mode::Qubo => Configuration::Spins(SpinVector::all(n, 1)),
        Mode::Qco => Configuration::Phases(PhaseVector::zeros(n)),
    };
    let solution = Solution::from_configuration(&q, &config)?;
    Ok(Block::new(header, txs, solution))
}

/// Genesis is checked structurally only; there is no threshold to beat.
pub fn verify_genesis(block: &Block, target: &DifficultyTarget) -> Result<(), RejectReason> {
    let expected = genesis_block(target).map_err(|_| RejectReason::TargetMismatch)?;
    structural(block, &[0; 32], target)?;
    check_id(block)?;
    if block != &expected {
        return Err(RejectReason::BlockIdMismatch);
    }
    Ok(())
}
