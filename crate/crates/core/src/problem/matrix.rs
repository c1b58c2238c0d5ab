use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ProblemError;

/// One stored off-diagonal coupling `Q[i][j] = Q[j][i] = value` with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// Symmetric real coupling matrix in sorted upper-triangle triplet form.
///
/// Only pairs with `i < j` are stored, in row-major order. Every objective in
/// this crate sums over `entries` in that order so that two parties computing
/// the same objective on the same matrix obtain bit-identical results.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    n: usize,
    entries: Vec<Coupling>,
    diag: Vec<f64>,
}

impl CouplingMatrix {
    /// Builds a matrix with an all-zero diagonal. Entries may arrive in any
    /// order; they are validated and sorted.
    pub fn new(n: usize, entries: Vec<Coupling>) -> Result<Self, ProblemError> {
        Self::with_diagonal(n, entries, vec![0.0; n])
    }

    pub fn with_diagonal(
        n: usize,
        mut entries: Vec<Coupling>,
        diag: Vec<f64>,
    ) -> Result<Self, ProblemError> {
        if diag.len() != n {
            return Err(ProblemError::DimensionMismatch {
                expected: n,
                actual: diag.len(),
            });
        }
        if let Some(d) = diag.iter().find(|d| !d.is_finite()) {
            return Err(ProblemError::NonFinite(*d));
        }
        for e in &entries {
            if e.i >= e.j || e.j >= n {
                return Err(ProblemError::InvalidIndex { i: e.i, j: e.j, n });
            }
            if !e.value.is_finite() {
                return Err(ProblemError::NonFinite(e.value));
            }
        }
        entries.sort_by_key(|e| (e.i, e.j));
        if let Some(w) = entries
            .windows(2)
            .find(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j))
        {
            return Err(ProblemError::DuplicateEntry {
                i: w[0].i,
                j: w[0].j,
            });
        }
        Ok(Self { n, entries, diag })
    }

    pub fn from_triplets(
        n: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, ProblemError> {
        let entries = triplets
            .into_iter()
            .map(|(i, j, value)| Coupling { i, j, value })
            .collect();
        Self::new(n, entries)
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: Vec::new(),
            diag: vec![0.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Coupling] {
        &self.entries
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Off-diagonal value at `(i, j)` in either orientation.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag.get(i).copied().unwrap_or(0.0);
        }
        let key = if i < j { (i, j) } else { (j, i) };
        self.entries
            .binary_search_by_key(&key, |e| (e.i, e.j))
            .map(|k| self.entries[k].value)
            .unwrap_or(0.0)
    }

    /// Trace, summed in index order.
    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    /// `Σ_{i<j} |Q_ij|`.
    pub fn offdiag_l1(&self) -> f64 {
        self.entries.iter().map(|e| e.value.abs()).sum()
    }

    /// Largest absolute row sum of the off-diagonal part; bounds the spectral
    /// radius (Gershgorin).
    pub fn max_abs_row_sum(&self) -> f64 {
        let mut rows = vec![0.0_f64; self.n];
        for e in &self.entries {
            rows[e.i] += e.value.abs();
            rows[e.j] += e.value.abs();
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    /// Symmetric adjacency lists: for each node, its `(neighbour, coupling)` pairs
    /// in ascending neighbour order.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.entries {
            adj[e.i].push((e.j, e.value));
            adj[e.j].push((e.i, e.value));
        }
        for row in &mut adj {
            row.sort_by_key(|&(k, _)| k);
        }
        adj
    }

    /// SHA-256 over a canonical little-endian encoding: `n`, entry count,
    /// each `(i, j, value)` in stored order, then the diagonal.
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update((self.n as u64).to_le_bytes());
        h.update((self.entries.len() as u64).to_le_bytes());
        for e in &self.entries {
            h.update((e.i as u64).to_le_bytes());
            h.update((e.j as u64).to_le_bytes());
            h.update(e.value.to_le_bytes());
        }
        for d in &self.diag {
            h.update(d.to_le_bytes());
        }
        h.finalize().into()
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<(), ProblemError> {
        if len == self.n {
            Ok(())
        } else {
            Err(ProblemError::DimensionMismatch {
                expected: self.n,
                actual: len,
            })
        }
    }
}

/// A QUBO / Ising configuration, every entry exactly `-1` or `+1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SpinVector(pub(crate) Vec<i8>);

impl SpinVector {
    pub fn new(spins: Vec<i8>) -> Result<Self, ProblemError> {
        if let Some(&s) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(ProblemError::InvalidSpin(s));
        }
        Ok(Self(spins))
    }

    pub fn all(n: usize, spin: i8) -> Self {
        assert!(spin == 1 || spin == -1, "spin must be ±1");
        Self(vec![spin; n])
    }

    /// `s_i = sign(cos θ_i)`, with a zero cosine rounding to `+1`.
    pub fn from_phases(phases: &PhaseVector) -> Self {
        Self(
            phases
                .iter()
                .map(|&t| if libm::cos(t) < 0.0 { -1 } else { 1 })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, i8> {
        self.0.iter()
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = -self.0[i];
    }
}

impl TryFrom<Vec<i8>> for SpinVector {
    type Error = ProblemError;

    fn try_from(v: Vec<i8>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<SpinVector> for Vec<i8> {
    fn from(s: SpinVector) -> Self {
        s.0
    }
}

/// A QCO / XY configuration: phases in radians, normalized to `[0, 2π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PhaseVector(pub(crate) Vec<f64>);

impl PhaseVector {
    /// Normalizes every angle into `[0, 2π)`; rejects non-finite input.
    pub fn new(phases: Vec<f64>) -> Result<Self, ProblemError> {
        if let Some(&t) = phases.iter().find(|t| !t.is_finite()) {
            return Err(ProblemError::NonFinite(t));
        }
        Ok(Self(phases.into_iter().map(normalize_angle).collect()))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    /// `θ_i = 0` for `s_i = +1` and `π` for `s_i = -1`.
    pub fn from_spins(spins: &SpinVector) -> Self {
        Self(
            spins
                .iter()
                .map(|&s| if s > 0 { 0.0 } else { std::f64::consts::PI })
                .collect(),
        )
    }

    /// Shifts every phase by `-θ_0` so the first node sits at zero.
    pub fn anchored(&self) -> Self {
        let Some(&first) = self.0.first() else {
            return self.clone();
        };
        Self(self.0.iter().map(|&t| normalize_angle(t - first)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }
}

impl TryFrom<Vec<f64>> for PhaseVector {
    type Error = ProblemError;

    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<PhaseVector> for Vec<f64> {
    fn from(p: PhaseVector) -> Self {
        p.0
    }
}

/// Which objective a configuration is scored against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Qubo,
    Qco,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Qubo => "qubo",
            Mode::Qco => "qco",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "qubo" => Ok(Mode::Qubo),
            "qco" => Ok(Mode::Qco),
            other => Err(ProblemError::Parse(format!(
                "unknown mode {other:?}; expected qubo or qco"
            ))),
        }
    }
}

/// Number of strictly-upper-triangular pairs of an `n × n` matrix.
pub fn upper_triangle_len(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// The `idx`-th pair `(i, j)`, `i < j`, of the upper triangle in row-major order.
pub fn upper_triangle_pair(n: usize, idx: usize) -> (usize, usize) {
    debug_assert!(idx < upper_triangle_len(n));
    let row_start = |i: usize| i * n - i * (i + 1) / 2;
    let b = (2 * n - 1) as f64;
    let mut i = ((b - (b * b - 8.0 * idx as f64).max(0.0).sqrt()) / 2.0).floor() as usize;
    i = i.min(n - 2);
    while i > 0 && row_start(i) > idx {
        i -= 1;
    }
    while row_start(i + 1) <= idx {
        i += 1;
    }
    (i, idx - row_start(i) + i + 1)
}

/// Maps a finite angle into `[0, 2π)`.
pub fn normalize_angle(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if r >= TAU {
        0.0
    } else {
        r
    }
}
