//! Compact solution encodings.
//!
//! Spins take one bit each, least significant bit first, `1` for `+1`; unused
//! bits of the last byte must be zero. Phases take a little-endian `u16` each,
//! the angle quantized to `PHASE_LEVELS` steps per turn.

use std::f64::consts::TAU;

use super::PowError;
use crate::problem::{
    evaluate_qco, evaluate_qubo, CouplingMatrix, Mode, PhaseVector, ProblemError, SpinVector,
};

/// Quantization steps per full turn.
pub const PHASE_LEVELS: u32 = 65_536;

#[derive(Debug, Clone, PartialEq)]
pub enum Configuration {
    Spins(SpinVector),
    Phases(PhaseVector),
}

impl Configuration {
    pub fn mode(&self) -> Mode {
        match self {
            Configuration::Spins(_) => Mode::Qubo,
            Configuration::Phases(_) => Mode::Qco,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Configuration::Spins(s) => s.len(),
            Configuration::Phases(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn objective(&self, q: &CouplingMatrix) -> Result<f64, ProblemError> {
        match self {
            Configuration::Spins(s) => evaluate_qubo(q, s),
            Configuration::Phases(t) => evaluate_qco(q, t),
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        match self {
            Configuration::Spins(s) => {
                let mut out = vec![0u8; s.len().div_ceil(8)];
                for (k, &v) in s.iter().enumerate() {
                    if v > 0 {
                        out[k / 8] |= 1 << (k % 8);
                    }
                }
                out
            }
            Configuration::Phases(t) => t
                .iter()
                .flat_map(|&x| quantize_phase(x).to_le_bytes())
                .collect(),
        }
    }

    /// Inverse of [`encode`](Self::encode) for a configuration of `n` nodes.
    pub fn decode(mode: Mode, n: usize, bytes: &[u8]) -> Result<Self, PowError> {
        match mode {
            Mode::Qubo => {
                let want = n.div_ceil(8);
                if bytes.len() != want {
                    return Err(PowError::Decode(format!(
                        "{} spin bytes, expected {want}",
                        bytes.len()
                    )));
                }
                if !n.is_multiple_of(8) && bytes[want - 1] >> (n % 8) != 0 {
                    return Err(PowError::Decode("nonzero padding bits".into()));
                }
                let spins = (0..n)
                    .map(|k| {
                        if bytes[k / 8] >> (k % 8) & 1 == 1 {
                            1
                        } else {
                            -1
                        }
                    })
                    .collect();
                Ok(Configuration::Spins(SpinVector::new(spins)?))
            }
            Mode::Qco => {
                if bytes.len() != 2 * n {
                    return Err(PowError::Decode(format!(
                        "{} phase bytes, expected {}",
                        bytes.len(),
                        2 * n
                    )));
                }
                let phases = bytes
                    .chunks_exact(2)
                    .map(|c| dequantize_phase(u16::from_le_bytes([c[0], c[1]])))
                    .collect();
                Ok(Configuration::Phases(PhaseVector::new(phases)?))
            }
        }
    }

    /// The configuration a verifier will actually score: encode then decode.
    pub fn quantized(&self) -> Self {
        Self::decode(self.mode(), self.len(), &self.encode()).expect("own encoding decodes")
    }
}

/// `round(θ · 65536 / 2π) mod 65536`.
pub fn quantize_phase(theta: f64) -> u16 {
    let steps = (theta / TAU * f64::from(PHASE_LEVELS)).round() as i64;
    steps.rem_euclid(i64::from(PHASE_LEVELS)) as u16
}

pub fn dequantize_phase(k: u16) -> f64 {
    f64::from(k) * TAU / f64::from(PHASE_LEVELS)
}

/// The solution section of a block.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub mode: Mode,
    pub encoded: Vec<u8>,
    /// Must equal, bit for bit, the objective of the decoded configuration.
    pub claimed_objective: f64,
}

impl Solution {
    /// Quantizes `config` and records its exact objective on `q`.
    pub fn from_configuration(
        q: &CouplingMatrix,
        config: &Configuration,
    ) -> Result<Self, PowError> {
        let quantized = config.quantized();
        Ok(Self {
            mode: config.mode(),
            encoded: quantized.encode(),
            claimed_objective: quantized.objective(q)?,
        })
    }

    pub fn decode(&self, n: usize) -> Result<Configuration, PowError> {
        Configuration::decode(self.mode, n, &self.encoded)
    }
}
