use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{GdError, GdParams};
use crate::problem::CouplingMatrix;
use crate::rng;

/// Complex amplitudes of the oscillator network plus the per-node effective gain.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorState {
    pub psi: Vec<Complex64>,
    pub gamma_eff: Vec<f64>,
    pub t: f64,
}

impl OscillatorState {
    pub fn new(psi: Vec<Complex64>, gamma_eff: Vec<f64>) -> Result<Self, GdError> {
        if psi.len() != gamma_eff.len() {
            return Err(GdError::Dimension {
                expected: psi.len(),
                actual: gamma_eff.len(),
            });
        }
        let state = Self {
            psi,
            gamma_eff,
            t: 0.0,
        };
        if !state.is_finite() {
            return Err(GdError::NonFinite { step: 0 });
        }
        Ok(state)
    }

    /// Small amplitudes with seeded uniformly random phases and a uniform gain.
    pub fn seeded(n: usize, amplitude: f64, gamma: f64, seed: u64) -> Self {
        let mut rng = rng::seeded(seed);
        let psi = (0..n)
            .map(|_| Complex64::from_polar(amplitude, rng.random_range(0.0..std::f64::consts::TAU)))
            .collect();
        Self {
            psi,
            gamma_eff: vec![gamma; n],
            t: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.psi.len()
    }

    pub fn densities(&self) -> Vec<f64> {
        self.psi.iter().map(|p| p.norm_sqr()).collect()
    }

    pub fn phases(&self) -> Vec<f64> {
        self.psi.iter().map(|p| p.arg()).collect()
    }

    pub fn mean_density(&self) -> f64 {
        if self.psi.is_empty() {
            return 0.0;
        }
        self.psi.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.psi.len() as f64
    }

    /// `max ρ_i − min ρ_i`.
    pub fn density_spread(&self) -> f64 {
        spread(self.psi.iter().map(|p| p.norm_sqr()))
    }

    pub fn is_finite(&self) -> bool {
        self.psi
            .iter()
            .all(|p| p.re.is_finite() && p.im.is_finite())
            && self.gamma_eff.iter().all(|g| g.is_finite())
    }
}

pub(crate) fn spread(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
        (lo.min(x), hi.max(x))
    });
    if lo.is_finite() {
        hi - lo
    } else {
        0.0
    }
}

/// Right-hand side of the complex rate equation,
/// `ψ̇_i = (γ_i − i v_i − σ|ψ_i|² − i U|ψ_i|²) ψ_i + Σ_j J_ij ψ_j`.
pub fn complex_drift(
    adj: &[Vec<(usize, f64)>],
    p: &GdParams,
    psi: &[Complex64],
    gamma: &[f64],
) -> Vec<Complex64> {
    (0..psi.len())
        .map(|i| {
            let rho = psi[i].norm_sqr();
            let v = p.blueshift(i);
            let own = Complex64::new(gamma[i] - p.sigma * rho, -v - p.u * rho) * psi[i];
            adj[i].iter().fold(own, |acc, &(j, c)| acc + psi[j] * c)
        })
        .collect()
}

/// Density and phase rates from the polar form:
///
/// ```text
/// ½ρ̇_i = (γ_i − σρ_i)ρ_i + Σ_j J_ij √(ρ_i ρ_j) cos θ_ij
///  θ̇_i = −v_i − Uρ_i − Σ_j J_ij √(ρ_j/ρ_i) sin θ_ij
/// ```
pub fn polar_rates(
    adj: &[Vec<(usize, f64)>],
    p: &GdParams,
    rho: &[f64],
    theta: &[f64],
    gamma: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let n = rho.len();
    let mut rho_dot = vec![0.0; n];
    let mut theta_dot = vec![0.0; n];
    for i in 0..n {
        let mut coupling_re = 0.0;
        let mut coupling_im = 0.0;
        let ri = rho[i].sqrt();
        for &(j, c) in &adj[i] {
            let rj = rho[j].sqrt();
            let d = theta[i] - theta[j];
            coupling_re += c * ri * rj * d.cos();
            if ri > 0.0 {
                coupling_im += c * (rj / ri) * d.sin();
            }
        }
        rho_dot[i] = 2.0 * ((gamma[i] - p.sigma * rho[i]) * rho[i] + coupling_re);
        theta_dot[i] = -p.blueshift(i) - p.u * rho[i] - coupling_im;
    }
    (rho_dot, theta_dot)
}

/// One noise-free explicit Euler step of the polar equations.
pub fn polar_euler_step(
    adj: &[Vec<(usize, f64)>],
    p: &GdParams,
    rho: &[f64],
    theta: &[f64],
    gamma: &[f64],
    dt: f64,
) -> (Vec<f64>, Vec<f64>) {
    let (rd, td) = polar_rates(adj, p, rho, theta, gamma);
    (
        rho.iter().zip(&rd).map(|(r, d)| r + dt * d).collect(),
        theta.iter().zip(&td).map(|(t, d)| t + dt * d).collect(),
    )
}

/// One noise-free explicit Euler step of the complex equation.
pub fn complex_euler_step(
    adj: &[Vec<(usize, f64)>],
    p: &GdParams,
    psi: &[Complex64],
    gamma: &[f64],
    dt: f64,
) -> Vec<Complex64> {
    let drift = complex_drift(adj, p, psi, gamma);
    psi.iter().zip(&drift).map(|(x, d)| x + d * dt).collect()
}

/// Euler step of the phase equation with all densities held equal, which
/// reduces it to `θ̇_i = −v_i − Uρ − Σ_j J_ij sin θ_ij`: gradient descent on
/// the XY energy when `U = v = 0`.
pub fn equal_density_phase_step(
    adj: &[Vec<(usize, f64)>],
    p: &GdParams,
    theta: &[f64],
    rho: f64,
    dt: f64,
) -> Vec<f64> {
    (0..theta.len())
        .map(|i| {
            let force: f64 = adj[i]
                .iter()
                .map(|&(j, c)| c * (theta[i] - theta[j]).sin())
                .sum();
            theta[i] + dt * (-p.blueshift(i) - p.u * rho - force)
        })
        .collect()
}

/// Euler–Maruyama integrator for the oscillator network.
///
/// Owns the noise stream and the gain ramp, so a run is fully determined by
/// the parameters, the matrix, and the initial state.
pub struct Integrator<'a> {
    q: &'a CouplingMatrix,
    adj: Vec<Vec<(usize, f64)>>,
    params: &'a GdParams,
    rng: ChaCha8Rng,
    ramp_level: f64,
    steps: u64,
}

impl<'a> Integrator<'a> {
    /// `ramp_start` is the gain level the linear ramp begins from.
    pub fn new(
        q: &'a CouplingMatrix,
        params: &'a GdParams,
        ramp_start: f64,
        seed: u64,
    ) -> Result<Self, GdError> {
        params.validate(q.n())?;
        Ok(Self {
            q,
            adj: q.adjacency(),
            params,
            rng: rng::seeded(seed),
            ramp_level: ramp_start,
            steps: 0,
        })
    }

    pub fn adjacency(&self) -> &[Vec<(usize, f64)>] {
        &self.adj
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn ramp_level(&self) -> f64 {
        self.ramp_level
    }

    /// The ramp has reached its ceiling (or never had anywhere to go).
    pub fn ramp_done(&self) -> bool {
        self.params.ramp_rate <= 0.0 || self.ramp_level >= self.params.gamma_max
    }

    /// Advances `state` by one step of `dt`: drift, then seeded noise scaled by
    /// `√dt`, then the gain ramp.
    pub fn step(&mut self, state: &mut OscillatorState) -> Result<(), GdError> {
        let n = self.q.n();
        if state.n() != n {
            return Err(GdError::Dimension {
                expected: n,
                actual: state.n(),
            });
        }
        let p = self.params;
        let dt = p.dt;
        let drift = complex_drift(&self.adj, p, &state.psi, &state.gamma_eff);
        let noisy = (p.noise_rho > 0.0 || p.noise_theta > 0.0) && !self.ramp_done();
        let sqrt_dt = dt.sqrt();
        #[allow(clippy::needless_range_loop)]
        for i in 0..n {
            let mut next = state.psi[i] + drift[i] * dt;
            if noisy {
                let radial: f64 = self.rng.sample(StandardNormal);
                let tangential: f64 = self.rng.sample(StandardNormal);
                let decay = noise_decay(state.psi[i].norm_sqr(), state.gamma_eff[i], p.sigma);
                let norm = state.psi[i].norm();
                let dir = if norm > 0.0 {
                    state.psi[i] / norm
                } else {
                    Complex64::new(1.0, 0.0)
                };
                next += dir
                    * Complex64::new(p.noise_rho * radial, p.noise_theta * tangential)
                    * (decay * sqrt_dt);
            }
            state.psi[i] = next;
        }
        let inc = (p.ramp_rate * dt)
            .min(p.gamma_max - self.ramp_level)
            .max(0.0);
        if inc > 0.0 {
            self.ramp_level += inc;
            for g in &mut state.gamma_eff {
                *g += inc;
            }
        }
        state.t += dt;
        self.steps += 1;
        if !state.is_finite() {
            return Err(GdError::NonFinite { step: self.steps });
        }
        Ok(())
    }

    /// Noise-free density and phase rates at `state`.
    pub fn rates(&self, state: &OscillatorState) -> (Vec<f64>, Vec<f64>) {
        polar_rates(
            &self.adj,
            self.params,
            &state.densities(),
            &state.phases(),
            &state.gamma_eff,
        )
    }
}

/// Perturbation scale factor: 1 far below saturation, falling to 0 as the
/// density approaches `γ/σ`.
fn noise_decay(rho: f64, gamma: f64, sigma: f64) -> f64 {
    if gamma <= 0.0 {
        1.0
    } else {
        (1.0 - sigma * rho / gamma).clamp(0.0, 1.0)
    }
}

/// Proportional pump control `γ_i ← γ_i − k (ρ_i − ρ̄) dt`, steering all
/// densities toward their mean.
pub fn pump_feedback(state: &mut OscillatorState, p: &GdParams) {
    let rho = state.densities();
    let mean = state.mean_density();
    for (g, r) in state.gamma_eff.iter_mut().zip(rho) {
        *g -= p.feedback_gain * (r - mean) * p.dt;
    }
}
