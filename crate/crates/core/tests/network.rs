use hamchain_core::netsim::{
    run_scenario, LatencyConfig, MiningMode, NodeConfig, ScenarioConfig, SolverKind,
};
use hamchain_core::pow::DifficultyTarget;
use proptest::prelude::*;

fn network(nodes: usize, seed: u64, base: f64, jitter: f64) -> ScenarioConfig {
    ScenarioConfig {
        nodes: (0..nodes)
            .map(|k| NodeConfig {
                power: 1.0 + k as f64 * 0.5,
                solver: SolverKind::Sa,
            })
            .collect(),
        latency: LatencyConfig {
            base,
            jitter_mean: jitter,
        },
        horizon: 200.0,
        seed,
        ..ScenarioConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn honest_nodes_converge_and_keep_deep_transactions(
        nodes in 2_usize..6,
        seed in any::<u64>(),
        base in 0.0_f64..1.5,
        jitter in 0.0_f64..1.0,
    ) {
        let r = run_scenario(&network(nodes, seed, base, jitter)).unwrap();
        let m = &r.metrics;
        prop_assert!(m.quiesced);
        prop_assert!(m.tips_agree);
        prop_assert_eq!(m.reorg_safety_violations, 0);
        prop_assert_eq!(m.blocks_produced, m.main_chain_height + m.stale_blocks);
        prop_assert_eq!(r.series.len() as u64, m.main_chain_height);
    }

    #[test]
    fn same_seed_same_run(seed in any::<u64>()) {
        let cfg = network(3, seed, 0.5, 0.5);
        let a = run_scenario(&cfg).unwrap();
        let b = run_scenario(&cfg).unwrap();
        prop_assert_eq!(a.series_csv(), b.series_csv());
        prop_assert_eq!(a, b);
    }
}

#[test]
fn latency_raises_the_fork_rate() {
    let mut slow = 0.0;
    let mut fast = 0.0;
    for seed in 0..10 {
        slow += run_scenario(&network(5, seed, 1.0, 0.5))
            .unwrap()
            .metrics
            .fork_rate;
        fast += run_scenario(&network(5, seed, 0.0, 0.0))
            .unwrap()
            .metrics
            .fork_rate;
    }
    assert_eq!(fast, 0.0);
    assert!(slow > 0.05, "{slow}");
}

#[test]
fn deeper_confirmation_takes_longer() {
    let cfg = network(3, 11, 0.2, 0.2);
    let shallow = run_scenario(&ScenarioConfig {
        confirmations: 1,
        ..cfg.clone()
    })
    .unwrap();
    let deep = run_scenario(&ScenarioConfig {
        confirmations: 6,
        ..cfg
    })
    .unwrap();
    assert!(deep.metrics.mean_confirmation_time > shallow.metrics.mean_confirmation_time);
    assert!(deep.metrics.confirmed_transactions <= shallow.metrics.confirmed_transactions);
}

#[test]
fn scenario_json_round_trip_and_strictness() {
    let cfg = network(2, 4, 0.1, 0.1);
    let text = serde_json::to_string(&cfg).unwrap();
    let back: ScenarioConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cfg);
    let minimal: ScenarioConfig =
        serde_json::from_str(r#"{"nodes": [{"power": 2.0, "solver": "gdsim"}], "mode": "real"}"#)
            .unwrap();
    assert_eq!(minimal.mode, MiningMode::Real);
    assert_eq!(minimal.nodes[0].solver, SolverKind::Gdsim);
    assert!(
        serde_json::from_str::<ScenarioConfig>(r#"{"nodes": [{"power": 1.0, "speed": 3}]}"#)
            .is_err()
    );
}

#[test]
fn real_mode_with_gdsim_miner() {
    let cfg = ScenarioConfig {
        nodes: vec![
            NodeConfig {
                power: 1.0,
                solver: SolverKind::Gdsim,
            },
            NodeConfig {
                power: 1.0,
                solver: SolverKind::Sa,
            },
        ],
        mode: MiningMode::Real,
        horizon: 12.0,
        target: DifficultyTarget {
            n: 8,
            density_pct: 50.0,
            sa_sweeps: 5,
            ..Default::default()
        },
        seconds_per_sweep: 0.4,
        ..ScenarioConfig::default()
    };
    let r = run_scenario(&cfg).unwrap();
    assert!(r.metrics.main_chain_height > 0);
    assert!(r.metrics.tips_agree);
}
