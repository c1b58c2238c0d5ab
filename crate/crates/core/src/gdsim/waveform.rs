//! Spatial picture behind the couplings: every node is a Gaussian wavepacket
//! `Ψ(r) = exp(−r²/2w²)` centred at its position, and the condensate is their
//! phased superposition. Integrals are midpoint sums on a square grid.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::GdError;
use crate::problem::{Coupling, CouplingMatrix, PhaseVector};

/// How many waists of margin the grid must keep around every node.
const MARGIN_WAISTS: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveformSpec {
    pub positions: Vec<[f64; 2]>,
    pub width: f64,
    /// The grid covers `[−grid_extent, grid_extent]²`.
    pub grid_extent: f64,
    pub grid_step: f64,
}

impl WaveformSpec {
    pub fn validate(&self) -> Result<(), GdError> {
        let bad = |m: String| Err(GdError::Waveform(m));
        if !(self.width > 0.0 && self.width.is_finite()) {
            return bad(format!("width must be positive, got {}", self.width));
        }
        if !(self.grid_step > 0.0 && self.grid_step.is_finite()) {
            return bad(format!(
                "grid step must be positive, got {}",
                self.grid_step
            ));
        }
        if self.grid_step > self.width / 4.0 {
            return bad(format!(
                "grid step {} coarser than width/4 = {}",
                self.grid_step,
                self.width / 4.0
            ));
        }
        let reach = self.grid_extent - MARGIN_WAISTS * self.width;
        for (i, p) in self.positions.iter().enumerate() {
            if !(p[0].abs() <= reach && p[1].abs() <= reach) {
                return bad(format!(
                    "node {i} at ({}, {}) is within 5 waists of the grid edge",
                    p[0], p[1]
                ));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    /// Cell-centre coordinates along one axis.
    fn axis(&self) -> Vec<f64> {
        let cells = (2.0 * self.grid_extent / self.grid_step).ceil() as usize;
        let h = 2.0 * self.grid_extent / cells as f64;
        (0..cells)
            .map(|k| -self.grid_extent + (k as f64 + 0.5) * h)
            .collect()
    }

    fn cell_area(&self) -> f64 {
        let axis = self.axis();
        let h = 2.0 * self.grid_extent / axis.len() as f64;
        h * h
    }

    /// `Ψ(|x − x_i|)` for every node at one grid point.
    fn profile(&self, x: f64, y: f64, out: &mut [f64]) {
        let inv = 1.0 / (2.0 * self.width * self.width);
        for (o, p) in out.iter_mut().zip(&self.positions) {
            let dx = x - p[0];
            let dy = y - p[1];
            *o = (-(dx * dx + dy * dy) * inv).exp();
        }
    }

    fn for_each_point(&self, mut f: impl FnMut(&[f64])) {
        let axis = self.axis();
        let mut psi = vec![0.0; self.n()];
        for &x in &axis {
            for &y in &axis {
                self.profile(x, y, &mut psi);
                f(&psi);
            }
        }
    }

    /// `∫|Ψ(|x − x_i|)|² dx` for each node.
    pub fn node_masses(&self) -> Result<Vec<f64>, GdError> {
        self.validate()?;
        let mut m = vec![0.0; self.n()];
        self.for_each_point(|psi| {
            for (acc, p) in m.iter_mut().zip(psi) {
                *acc += p * p;
            }
        });
        let a = self.cell_area();
        Ok(m.into_iter().map(|x| x * a).collect())
    }

    /// Total particle number `∫|Σ_i Ψ(|x − x_i|) e^{iθ_i}|² dx`.
    pub fn total_mass(&self, theta: &PhaseVector) -> Result<f64, GdError> {
        self.validate()?;
        if theta.len() != self.n() {
            return Err(GdError::Dimension {
                expected: self.n(),
                actual: theta.len(),
            });
        }
        let phasors: Vec<Complex64> = theta
            .iter()
            .map(|&t| Complex64::from_polar(1.0, t))
            .collect();
        let mut total = 0.0;
        self.for_each_point(|psi| {
            let field: Complex64 = psi.iter().zip(&phasors).map(|(a, z)| z * a).sum();
            total += field.norm_sqr();
        });
        Ok(total * self.cell_area())
    }

    /// Overlap couplings `J_ij = ∫ [Ψ_i Ψ_j* + c.c.] dx = 2 ∫ Ψ_i Ψ_j dx` for
    /// every pair, with the node masses on the diagonal.
    pub fn overlap_couplings(&self) -> Result<CouplingMatrix, GdError> {
        self.validate()?;
        let n = self.n();
        let mut pair = vec![0.0; n * n.saturating_sub(1) / 2];
        let mut diag = vec![0.0; n];
        self.for_each_point(|psi| {
            let mut k = 0;
            for i in 0..n {
                diag[i] += psi[i] * psi[i];
                for j in i + 1..n {
                    pair[k] += psi[i] * psi[j];
                    k += 1;
                }
            }
        });
        let a = self.cell_area();
        let mut entries = Vec::with_capacity(pair.len());
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                entries.push(Coupling {
                    i,
                    j,
                    value: 2.0 * pair[k] * a,
                });
                k += 1;
            }
        }
        Ok(CouplingMatrix::with_diagonal(
            n,
            entries,
            diag.into_iter().map(|d| d * a).collect(),
        )?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec(positions: Vec<[f64; 2]>) -> WaveformSpec {
        WaveformSpec {
            positions,
            width: 1.0,
            grid_extent: 12.0,
            grid_step: 0.2,
        }
    }

    #[test]
    fn single_node_mass_is_phase_independent() {
        let s = spec(vec![[0.5, -1.0]]);
        let a = s.total_mass(&PhaseVector::new(vec![0.0]).unwrap()).unwrap();
        let b = s.total_mass(&PhaseVector::new(vec![2.0]).unwrap()).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
        assert!((a - PI).abs() < 1e-9 * PI, "{a}");
    }

    #[test]
    fn distant_nodes_do_not_interfere() {
        let s = WaveformSpec {
            positions: vec![[-10.0, 0.0], [10.0, 0.0]],
            width: 1.0,
            grid_extent: 16.0,
            grid_step: 0.2,
        };
        for t in [0.0, 1.0, PI] {
            let m = s
                .total_mass(&PhaseVector::new(vec![0.0, t]).unwrap())
                .unwrap();
            assert!((m - 2.0 * PI).abs() < 1e-9, "{m}");
        }
        assert!(s.overlap_couplings().unwrap().get(0, 1) < 1e-20);
    }

    #[test]
    fn coincident_nodes_overlap_fully() {
        let s = spec(vec![[1.0, 1.0], [1.0, 1.0]]);
        let j = s.overlap_couplings().unwrap();
        let m = s.node_masses().unwrap();
        assert!((j.get(0, 1) - 2.0 * m[0]).abs() < 1e-12 * m[0]);
    }

    #[test]
    fn gaussian_overlap_matches_closed_form() {
        let w = 1.3;
        let d = 1.7;
        let s = WaveformSpec {
            positions: vec![[0.0, 0.0], [d, 0.0]],
            width: w,
            grid_extent: 10.0,
            grid_step: w / 5.0,
        };
        let mass = PI * w * w;
        let closed = 2.0 * (-(d * d) / (4.0 * w * w)).exp() * mass;
        let j = s.overlap_couplings().unwrap().get(0, 1);
        assert!(((j - closed) / closed).abs() < 1e-6, "{j} vs {closed}");
    }

    #[test]
    fn grid_checks() {
        let mut s = spec(vec![[0.0, 0.0]]);
        s.grid_step = 0.3;
        assert!(matches!(s.overlap_couplings(), Err(GdError::Waveform(_))));
        let s = spec(vec![[7.5, 0.0]]);
        assert!(matches!(
            s.total_mass(&PhaseVector::zeros(1)),
            Err(GdError::Waveform(_))
        ));
        let s = WaveformSpec {
            width: 0.0,
            ..spec(vec![])
        };
        assert!(s.validate().is_err());
    }
}
