use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::matrix::{upper_triangle_len, upper_triangle_pair};
use super::{Coupling, CouplingMatrix, ProblemError};

/// Parameters of a random sparse benchmark instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InstanceSpec {
    pub n: usize,
    /// Percentage of nonzero upper-triangle entries, `0 < D ≤ 100`.
    pub density_pct: f64,
    pub j_min: f64,
    pub j_max: f64,
    pub seed: u64,
}

impl Default for InstanceSpec {
    fn default() -> Self {
        Self {
            n: 16,
            density_pct: 50.0,
            j_min: -1.0,
            j_max: 1.0,
            seed: 0,
        }
    }
}

impl InstanceSpec {
    pub fn new(n: usize, density_pct: f64, j_min: f64, j_max: f64, seed: u64) -> Self {
        Self {
            n,
            density_pct,
            j_min,
            j_max,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.n < 2 {
            return Err(ProblemError::InvalidSpec(format!(
                "n must be at least 2, got {}",
                self.n
            )));
        }
        if !(self.density_pct > 0.0 && self.density_pct <= 100.0) {
            return Err(ProblemError::InvalidSpec(format!(
                "density must lie in (0, 100], got {}",
                self.density_pct
            )));
        }
        check_range(self.j_min, self.j_max)
    }

    /// `m = round(n(n−1)·D/200)`.
    pub fn nonzeros(&self) -> usize {
        nonzero_count(self.n, self.density_pct)
    }
}

pub(crate) fn check_range(j_min: f64, j_max: f64) -> Result<(), ProblemError> {
    if !(j_min.is_finite() && j_max.is_finite() && j_min < j_max) {
        return Err(ProblemError::InvalidRange { j_min, j_max });
    }
    Ok(())
}

/// Number of nonzero upper-triangle entries for size `n` and density `D` percent.
pub fn nonzero_count(n: usize, density_pct: f64) -> usize {
    ((n * n.saturating_sub(1)) as f64 * density_pct / 200.0).round() as usize
}

/// Seeded random instance with exactly [`InstanceSpec::nonzeros`] couplings,
/// uniform in `[j_min, j_max)`, at uniformly chosen positions.
pub fn random_instance(spec: &InstanceSpec) -> Result<CouplingMatrix, ProblemError> {
    spec.validate()?;
    let m = spec.nonzeros();
    if m == 0 {
        return Err(ProblemError::InvalidSpec(format!(
            "n = {} and D = {} yield no nonzero entries",
            spec.n, spec.density_pct
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut positions = index::sample(&mut rng, upper_triangle_len(spec.n), m).into_vec();
    positions.sort_unstable();
    let entries = positions
        .into_iter()
        .map(|idx| {
            let (i, j) = upper_triangle_pair(spec.n, idx);
            Coupling {
                i,
                j,
                value: rng.random_range(spec.j_min..spec.j_max),
            }
        })
        .collect();
    CouplingMatrix::new(spec.n, entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_density_fills_triangle() {
        let q = random_instance(&InstanceSpec::new(5, 100.0, -1.0, 1.0, 1)).unwrap();
        assert_eq!(q.nnz(), 10);
    }

    #[test]
    fn desk_scale_count_matches_large_example() {
        assert_eq!(nonzero_count(2000, 1.0), 19990);
        let q = random_instance(&InstanceSpec::new(2000, 1.0, -2.0, 2.0, 9)).unwrap();
        assert_eq!(q.nnz(), 19990);
        assert!(q.entries().iter().all(|e| (-2.0..2.0).contains(&e.value)));
    }

    #[test]
    fn deterministic_from_seed() {
        let spec = InstanceSpec::new(30, 20.0, -1.0, 1.0, 77);
        assert_eq!(
            random_instance(&spec).unwrap(),
            random_instance(&spec).unwrap()
        );
        let other = InstanceSpec {
            seed: 78,
            ..spec.clone()
        };
        assert_ne!(
            random_instance(&spec).unwrap(),
            random_instance(&other).unwrap()
        );
    }

    #[test]
    fn rejects_empty_and_invalid_specs() {
        assert!(random_instance(&InstanceSpec::new(2, 0.1, -1.0, 1.0, 0)).is_err());
        assert!(random_instance(&InstanceSpec::new(5, 0.0, -1.0, 1.0, 0)).is_err());
        assert!(random_instance(&InstanceSpec::new(5, 101.0, -1.0, 1.0, 0)).is_err());
        assert!(random_instance(&InstanceSpec::new(5, 50.0, 1.0, 1.0, 0)).is_err());
        assert!(random_instance(&InstanceSpec::new(1, 50.0, -1.0, 1.0, 0)).is_err());
    }
}
