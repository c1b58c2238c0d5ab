//! Fixed-width little-endian block serialization.

use super::{Block, BlockHeader, DifficultyTarget, PowError, Solution, Transaction};
use crate::problem::Mode;

/// `n u32 ‖ density f32 ‖ j_min f64 ‖ j_max f64 ‖ mode u8 ‖ sweeps u64 ‖ margin u64`.
pub const TARGET_LEN: usize = 4 + 4 + 8 + 8 + 1 + 8 + 8;
/// `version ‖ prev_id ‖ merkle_root ‖ timestamp ‖ target ‖ nonce`.
pub const HEADER_LEN: usize = 4 + 32 + 32 + 8 + TARGET_LEN + 4;

pub(crate) fn mode_byte(mode: Mode) -> u8 {
    match mode {
        Mode::Qubo => 0,
        Mode::Qco => 1,
    }
}

fn mode_from_byte(b: u8) -> Result<Mode, PowError> {
    match b {
        0 => Ok(Mode::Qubo),
        1 => Ok(Mode::Qco),
        other => Err(PowError::Decode(format!("unknown mode byte {other}"))),
    }
}

fn put_target(out: &mut Vec<u8>, t: &DifficultyTarget) {
    out.extend_from_slice(&t.n.to_le_bytes());
    out.extend_from_slice(&t.density_pct.to_le_bytes());
    out.extend_from_slice(&t.j_min.to_le_bytes());
    out.extend_from_slice(&t.j_max.to_le_bytes());
    out.push(mode_byte(t.mode));
    out.extend_from_slice(&t.sa_sweeps.to_le_bytes());
    out.extend_from_slice(&t.margin_ppm.to_le_bytes());
}

pub(crate) fn header_bytes(h: &BlockHeader) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN);
    out.extend_from_slice(&h.version.to_le_bytes());
    out.extend_from_slice(&h.prev_id);
    out.extend_from_slice(&h.merkle_root);
    out.extend_from_slice(&h.timestamp.to_le_bytes());
    put_target(&mut out, &h.target);
    out.extend_from_slice(&h.nonce.to_le_bytes());
    out
}

pub fn encode_block(b: &Block) -> Vec<u8> {
    let mut out = header_bytes(&b.header);
    out.extend_from_slice(&(b.transactions.len() as u32).to_le_bytes());
    for tx in &b.transactions {
        out.extend_from_slice(&(tx.payload().len() as u32).to_le_bytes());
        out.extend_from_slice(tx.payload());
    }
    out.push(mode_byte(b.solution.mode));
    out.extend_from_slice(&(b.solution.encoded.len() as u32).to_le_bytes());
    out.extend_from_slice(&b.solution.encoded);
    out.extend_from_slice(&b.solution.claimed_objective.to_le_bytes());
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8], PowError> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| {
                PowError::Decode(format!(
                    "truncated: need {len} bytes at offset {}",
                    self.pos
                ))
            })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], PowError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8, PowError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, PowError> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64, PowError> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn f32(&mut self) -> Result<f32, PowError> {
        Ok(f32::from_le_bytes(self.array()?))
    }

    fn f64(&mut self) -> Result<f64, PowError> {
        Ok(f64::from_le_bytes(self.array()?))
    }
}

fn read_header(r: &mut Reader<'_>) -> Result<BlockHeader, PowError> {
    Ok(BlockHeader {
        version: r.u32()?,
        prev_id: r.array()?,
        merkle_root: r.array()?,
        timestamp: r.u64()?,
        target: DifficultyTarget {
            n: r.u32()?,
            density_pct: r.f32()?,
            j_min: r.f64()?,
            j_max: r.f64()?,
            mode: mode_from_byte(r.u8()?)?,
            sa_sweeps: r.u64()?,
            margin_ppm: r.u64()?,
        },
        nonce: r.u32()?,
    })
}

/// Parses one block, rejecting truncation, trailing bytes, unknown mode bytes
/// and out-of-range payload lengths. The block id is recomputed.
pub fn decode_block(bytes: &[u8]) -> Result<Block, PowError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let header = read_header(&mut r)?;
    let count = r.u32()? as usize;
    // Each transaction needs at least five bytes; reject absurd counts before allocating.
    if count > bytes.len() / 5 {
        return Err(PowError::Decode(format!(
            "transaction count {count} exceeds input size"
        )));
    }
    let mut transactions = Vec::with_capacity(count);
    for _ in 0..count {
        let len = r.u32()? as usize;
        transactions.push(
            Transaction::new(r.take(len)?.to_vec()).map_err(|e| PowError::Decode(e.to_string()))?,
        );
    }
    let mode = mode_from_byte(r.u8()?)?;
    let len = r.u32()? as usize;
    let encoded = r.take(len)?.to_vec();
    let claimed_objective = r.f64()?;
    if r.pos != bytes.len() {
        return Err(PowError::Decode(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    Ok(Block::new(
        header,
        transactions,
        Solution {
            mode,
            encoded,
            claimed_objective,
        },
    ))
}
