//! Hashing block content into a coupling matrix.
//!
//! Positions of the `m` nonzero entries come from a partial Fisher–Yates
//! shuffle of the upper triangle, seeded by the parent id, Merkle root and
//! nonce. Values come from a stream of `m` byte strings, each prefixed with
//! the serialized header and mapped into the coupling range by [`h0_map`].
//! How the stream is formed depends on the transaction count `X`:
//!
//! * `X = m`: one value per transaction payload.
//! * `X > m`: the payloads are split into `m` contiguous groups whose sizes
//!   differ by at most one; each group's concatenation is digested.
//! * `X < m`: every payload on its own, then the pairs of transaction ids
//!   `(0,1), (0,2), …, (1,2), …`. If even the pairs run out, the whole
//!   sequence repeats with a round counter inserted after the header.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use super::{sha256, wire, BlockHeader, DifficultyTarget, Hash32, PowError, Transaction};
use crate::problem::{upper_triangle_len, upper_triangle_pair, Coupling, CouplingMatrix};

/// Maps `data` into `[j_min, j_max)` through the first eight digest bytes read
/// as a big-endian fraction of `2^64`.
pub fn h0_map(data: &[u8], j_min: f64, j_max: f64) -> Result<f64, PowError> {
    if j_min.partial_cmp(&j_max) != Some(std::cmp::Ordering::Less) {
        return Err(PowError::InvalidTarget(format!(
            "coupling range [{j_min}, {j_max}] is empty"
        )));
    }
    let d = sha256(data);
    Ok(prefix_to_range(&d, j_min, j_max))
}

fn prefix_to_range(digest: &Hash32, j_min: f64, j_max: f64) -> f64 {
    let u = u64::from_be_bytes(digest[..8].try_into().expect("32-byte digest"));
    j_min + (u as f64 / 18_446_744_073_709_551_616.0) * (j_max - j_min)
}

/// What feeds the `k`-th value of the stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueSource {
    /// One transaction payload.
    Single { tx: usize },
    /// Payloads `start..end` concatenated and digested.
    Group { start: usize, end: usize },
    /// Transaction ids of `a` then `b`, `a < b`.
    Pair { a: usize, b: usize },
}

/// Source of each of the `m` values, together with its repetition round
/// (zero except when `X < m` and the pairs are exhausted).
pub fn value_sources(x: usize, m: usize) -> Vec<(u32, ValueSource)> {
    let mut out = Vec::with_capacity(m);
    if x == 0 {
        return out;
    }
    if x > m {
        out.extend((0..m).map(|g| {
            (
                0,
                ValueSource::Group {
                    start: g * x / m,
                    end: (g + 1) * x / m,
                },
            )
        }));
        return out;
    }
    let mut round = 0_u32;
    'fill: loop {
        for tx in 0..x {
            if out.len() == m {
                break 'fill;
            }
            out.push((round, ValueSource::Single { tx }));
        }
        for a in 0..x {
            for b in a + 1..x {
                if out.len() == m {
                    break 'fill;
                }
                out.push((round, ValueSource::Pair { a, b }));
            }
        }
        round += 1;
    }
    out
}

/// Everything the matrix depends on: the header (nonce included) and the
/// transactions.
#[derive(Debug, Clone, Copy)]
pub struct BlockContent<'a> {
    pub header: &'a BlockHeader,
    pub transactions: &'a [Transaction],
}

/// Seed of the position shuffle: `SHA-256(prev_id ‖ merkle_root ‖ nonce)`.
pub fn position_seed(header: &BlockHeader) -> Hash32 {
    let mut h = Sha256::new();
    h.update(header.prev_id);
    h.update(header.merkle_root);
    h.update(header.nonce.to_le_bytes());
    h.finalize().into()
}

/// The first `m` pairs of a seeded Fisher–Yates permutation of the upper
/// triangle of an `n × n` matrix.
pub fn entry_positions(n: usize, m: usize, seed: Hash32) -> Result<Vec<(usize, usize)>, PowError> {
    let total = upper_triangle_len(n) as u64;
    if m as u64 > total {
        return Err(PowError::InvalidTarget(format!(
            "{m} entries do not fit an n = {n} upper triangle"
        )));
    }
    let mut rng = ChaCha20Rng::from_seed(seed);
    // Sparse view of the permuted index array: only swapped slots are stored.
    let mut swapped: HashMap<u64, u64> = HashMap::with_capacity(2 * m);
    let mut out = Vec::with_capacity(m);
    for k in 0..m as u64 {
        let r = rng.random_range(k..total);
        let at_r = swapped.get(&r).copied().unwrap_or(r);
        let at_k = swapped.get(&k).copied().unwrap_or(k);
        swapped.insert(r, at_k);
        out.push(upper_triangle_pair(n, at_r as usize));
    }
    Ok(out)
}

fn source_value(
    prefix: &[u8],
    round: u32,
    source: ValueSource,
    txs: &[Transaction],
    target: &DifficultyTarget,
) -> f64 {
    let mut h = Sha256::new();
    h.update(prefix);
    if round > 0 {
        h.update(round.to_le_bytes());
    }
    match source {
        ValueSource::Single { tx } => h.update(txs[tx].payload()),
        ValueSource::Group { start, end } => {
            let mut g = Sha256::new();
            for t in &txs[start..end] {
                g.update(t.payload());
            }
            h.update(g.finalize());
        }
        ValueSource::Pair { a, b } => {
            h.update(txs[a].txid());
            h.update(txs[b].txid());
        }
    }
    prefix_to_range(&h.finalize().into(), target.j_min, target.j_max)
}

/// Builds the block's coupling matrix. A pure function of the header fields
/// (nonce included) and the transactions.
pub fn build_coupling_matrix(content: BlockContent<'_>) -> Result<CouplingMatrix, PowError> {
    let target = &content.header.target;
    target.validate()?;
    if content.transactions.is_empty() {
        return Err(PowError::EmptyBlock);
    }
    let n = target.n as usize;
    let m = target.nonzeros();
    let positions = entry_positions(n, m, position_seed(content.header))?;
    let prefix = wire::header_bytes(content.header);
    let entries = value_sources(content.transactions.len(), m)
        .into_iter()
        .zip(positions)
        .map(|((round, source), (i, j))| Coupling {
            i,
            j,
            value: source_value(&prefix, round, source, content.transactions, target),
        })
        .collect();
    Ok(CouplingMatrix::new(n, entries)?)
}
