use std::f64::consts::PI;

use hamchain_core::gdsim::{
    complex_drift, equal_density_phase_step, polar_rates, run, solve_qco, GdParams, OscillatorState,
};
use hamchain_core::problem::{
    evaluate_qco, grid_search_qco, random_instance, xy_energy, CouplingMatrix, InstanceSpec,
    PhaseVector,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn instance(n: usize, seed: u64) -> CouplingMatrix {
    random_instance(&InstanceSpec::new(n, 60.0, -1.0, 1.0, seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// The polar rates are the chain rule applied to the complex drift:
    /// ρ̇ = 2 Re(ψ* ψ̇) and θ̇ = Im(ψ̇ / ψ).
    #[test]
    fn polar_rates_are_the_complex_drift_in_polar_form(
        seed in 0_u64..500,
        rho in prop::collection::vec(0.1_f64..3.0, 6),
        theta in prop::collection::vec(-PI..PI, 6),
        gamma in prop::collection::vec(-1.0_f64..1.0, 6),
        u in 0.0_f64..1.0,
    ) {
        let q = instance(6, seed);
        let adj = q.adjacency();
        let p = GdParams { u, v: vec![0.1, 0.0, -0.2, 0.3, 0.0, 0.05], ..GdParams::default() };
        let psi: Vec<Complex64> = rho.iter().zip(&theta).map(|(r, t)| Complex64::from_polar(r.sqrt(), *t)).collect();
        let drift = complex_drift(&adj, &p, &psi, &gamma);
        let (rd, td) = polar_rates(&adj, &p, &rho, &theta, &gamma);
        for i in 0..6 {
            let rho_dot = 2.0 * (psi[i].conj() * drift[i]).re;
            let theta_dot = (drift[i] / psi[i]).im;
            prop_assert!((rho_dot - rd[i]).abs() < 1e-10 * (1.0 + rd[i].abs()));
            prop_assert!((theta_dot - td[i]).abs() < 1e-10 * (1.0 + td[i].abs()));
        }
    }

    #[test]
    fn equal_density_flow_never_raises_xy_energy(seed in 0_u64..500, theta in prop::collection::vec(-PI..PI, 8)) {
        let q = instance(8, seed);
        let adj = q.adjacency();
        let p = GdParams::default();
        let mut t = theta;
        let mut prev = xy_energy(&q, &PhaseVector::new(t.clone()).unwrap()).unwrap();
        for _ in 0..500 {
            t = equal_density_phase_step(&adj, &p, &t, 1.0, 5e-3);
            let e = xy_energy(&q, &PhaseVector::new(t.clone()).unwrap()).unwrap();
            prop_assert!(e <= prev + 1e-12, "{} > {}", e, prev);
            prev = e;
        }
    }
}

#[test]
fn steady_state_reports_hold_their_tolerances() {
    for seed in 0..6 {
        let q = instance(5, 300 + seed);
        let p = GdParams {
            seed,
            ..GdParams::default()
        };
        let (state, report) = run(&q, &p, seed, |_| {}).unwrap();
        assert!(report.converged, "seed {seed}: {report:?}");
        assert!(report.max_density_residual < p.density_tol * state.mean_density());
        assert!(report.phase_rate_spread < p.phase_rate_tol);
        assert!(
            report.density_spread < 1e-2 * state.mean_density(),
            "{report:?}"
        );
    }
}

#[test]
fn observer_sees_every_step_and_state_stays_finite() {
    let q = instance(6, 1);
    let p = GdParams {
        max_steps: 500,
        ..GdParams::default()
    };
    let mut seen = 0;
    let mut finite = true;
    run(&q, &p, 3, |s: &OscillatorState| {
        seen += 1;
        finite &= s.is_finite();
    })
    .unwrap();
    assert_eq!(seen, 501);
    assert!(finite);
}

#[test]
fn unfrustrated_ring_aligns() {
    let q = CouplingMatrix::from_triplets(
        5,
        (0..5).map(|i| (i.min((i + 1) % 5), i.max((i + 1) % 5), 0.8)),
    )
    .unwrap();
    let (t, _) = solve_qco(&q, &GdParams::default()).unwrap();
    let (_, grid) = grid_search_qco(&q, 8).unwrap();
    assert!((evaluate_qco(&q, &t).unwrap() - grid).abs() < 1e-6);
}
