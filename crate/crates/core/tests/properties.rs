use std::f64::consts::{PI, TAU};

use hamchain_core::baselines::{sa_qubo, SaParams};
use hamchain_core::ledger::{AppendOutcome, BlockStore, ChainParams, VerifyMode};
use hamchain_core::netsim::{attacker_race_profile, gamblers_ruin};
use hamchain_core::pow::{
    decode_block, dequantize_phase, encode_block, merkle_root, quantize_phase, retarget_factor,
    Block, BlockHeader, Configuration, DifficultyTarget, Solution, Transaction, BLOCK_VERSION,
};
use hamchain_core::problem::{
    brute_force_qubo, evaluate_qco, evaluate_qubo, ising_energy, random_instance, xy_energy,
    CouplingMatrix, InstanceSpec, Mode, PhaseVector, SpinVector,
};
use proptest::prelude::*;

fn instance(n: usize, seed: u64) -> CouplingMatrix {
    random_instance(&InstanceSpec::new(n, 60.0, -1.0, 1.0, seed)).unwrap()
}

fn spins(n: usize) -> impl Strategy<Value = Vec<i8>> {
    prop::collection::vec(prop::bool::ANY.prop_map(|b| if b { 1 } else { -1 }), n)
}

fn target(mode: Mode) -> impl Strategy<Value = DifficultyTarget> {
    (8_u32..40, 1.0_f32..100.0, 1_u64..500, 0_u64..1000).prop_map(move |(n, d, sweeps, ppm)| {
        DifficultyTarget {
            n,
            density_pct: d,
            mode,
            sa_sweeps: sweeps,
            margin_ppm: ppm,
            ..Default::default()
        }
    })
}

fn block() -> impl Strategy<Value = Block> {
    (
        prop_oneof![target(Mode::Qubo), target(Mode::Qco)],
        any::<[u8; 32]>(),
        any::<u64>(),
        any::<u32>(),
        prop::collection::vec(prop::collection::vec(any::<u8>(), 1..64), 1..6),
        any::<u64>(),
        -1e6_f64..1e6,
    )
        .prop_map(
            |(target, prev_id, timestamp, nonce, payloads, bits, claimed)| {
                let txs: Vec<_> = payloads
                    .into_iter()
                    .map(|p| Transaction::new(p).unwrap())
                    .collect();
                let n = target.n as usize;
                let encoded = match target.mode {
                    Mode::Qubo => {
                        let s = SpinVector::new(
                            (0..n)
                                .map(|k| if bits >> (k % 64) & 1 == 1 { 1 } else { -1 })
                                .collect(),
                        )
                        .unwrap();
                        Configuration::Spins(s).encode()
                    }
                    Mode::Qco => {
                        let t = PhaseVector::new(
                            (0..n)
                                .map(|k| (k as f64 * 0.37 + (bits % 1000) as f64) % TAU)
                                .collect(),
                        )
                        .unwrap();
                        Configuration::Phases(t).encode()
                    }
                };
                let header = BlockHeader {
                    version: BLOCK_VERSION,
                    prev_id,
                    merkle_root: merkle_root(&txs).unwrap(),
                    timestamp,
                    target: target.clone(),
                    nonce,
                };
                Block::new(
                    header,
                    txs,
                    Solution {
                        mode: target.mode,
                        encoded,
                        claimed_objective: claimed,
                    },
                )
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn qubo_is_trace_minus_twice_ising(seed in 0_u64..1000, s in spins(12)) {
        let q = instance(12, seed);
        let s = SpinVector::new(s).unwrap();
        let lhs = evaluate_qubo(&q, &s).unwrap();
        let rhs = q.trace() - 2.0 * ising_energy(&q, &s).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn qco_is_trace_minus_twice_xy(seed in 0_u64..1000, t in prop::collection::vec(-10.0_f64..10.0, 9)) {
        let q = instance(9, seed);
        let t = PhaseVector::new(t).unwrap();
        let lhs = evaluate_qco(&q, &t).unwrap();
        let rhs = q.trace() - 2.0 * xy_energy(&q, &t).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn qco_agrees_with_qubo_on_spin_phases(seed in 0_u64..1000, s in spins(10)) {
        let q = instance(10, seed);
        let s = SpinVector::new(s).unwrap();
        let a = evaluate_qubo(&q, &s).unwrap();
        let b = evaluate_qco(&q, &PhaseVector::from_spins(&s)).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn objective_invariant_under_global_rotation(seed in 0_u64..1000, t in prop::collection::vec(0.0_f64..TAU, 7), shift in -PI..PI) {
        let q = instance(7, seed);
        let a = evaluate_qco(&q, &PhaseVector::new(t.clone()).unwrap()).unwrap();
        let b = evaluate_qco(&q, &PhaseVector::new(t.iter().map(|x| x + shift).collect()).unwrap()).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn brute_force_dominates_every_assignment(seed in 0_u64..200, s in spins(10)) {
        let q = instance(10, seed);
        let (_, best) = brute_force_qubo(&q).unwrap();
        prop_assert!(best >= evaluate_qubo(&q, &SpinVector::new(s).unwrap()).unwrap());
    }

    #[test]
    fn annealing_never_beats_the_optimum(seed in 0_u64..200) {
        let q = instance(10, seed);
        let (s, v) = sa_qubo(&q, &SaParams { sweeps: 50, restarts: 1, seed, ..SaParams::default() }).unwrap();
        prop_assert_eq!(v, evaluate_qubo(&q, &s).unwrap());
        prop_assert!(v <= brute_force_qubo(&q).unwrap().1);
    }

    #[test]
    fn phase_quantization_error_is_half_a_step(theta in -20.0_f64..20.0) {
        let back = dequantize_phase(quantize_phase(theta));
        let err = (back - theta).sin().abs().asin();
        prop_assert!(err <= PI / 65_536.0 + 1e-12);
    }

    #[test]
    fn solution_claims_match_quantized_objective(seed in 0_u64..500, t in prop::collection::vec(0.0_f64..TAU, 8)) {
        let q = instance(8, seed);
        let config = Configuration::Phases(PhaseVector::new(t).unwrap());
        let sol = Solution::from_configuration(&q, &config).unwrap();
        let decoded = sol.decode(8).unwrap();
        prop_assert_eq!(decoded.objective(&q).unwrap().to_bits(), sol.claimed_objective.to_bits());
        prop_assert!((sol.claimed_objective - config.objective(&q).unwrap()).abs() < 1e-3);
    }

    #[test]
    fn wire_round_trip(b in block()) {
        let bytes = encode_block(&b);
        let back = decode_block(&bytes).unwrap();
        prop_assert_eq!(&back, &b);
        prop_assert_eq!(encode_block(&back), bytes);
    }

    #[test]
    fn truncated_wire_never_decodes(b in block(), cut in 1_usize..64) {
        let bytes = encode_block(&b);
        let keep = bytes.len().saturating_sub(cut);
        prop_assert!(decode_block(&bytes[..keep]).is_err());
    }

    #[test]
    fn merkle_root_commits_to_order_and_content(payloads in prop::collection::vec(prop::collection::vec(any::<u8>(), 1..16), 2..8)) {
        let txs: Vec<_> = payloads.iter().map(|p| Transaction::new(p.clone()).unwrap()).collect();
        let root = merkle_root(&txs).unwrap();
        let mut swapped = txs.clone();
        swapped.swap(0, 1);
        if payloads[0] != payloads[1] {
            prop_assert_ne!(merkle_root(&swapped).unwrap(), root);
        }
        let mut changed = payloads.clone();
        changed[0].push(0);
        let changed: Vec<_> = changed.into_iter().map(|p| Transaction::new(p).unwrap()).collect();
        prop_assert_ne!(merkle_root(&changed).unwrap(), root);
    }

    #[test]
    fn retarget_factor_is_clamped(interval in 0.1_f64..1000.0, intervals in 1_u64..5000, span in -10.0_f64..1e7) {
        let f = retarget_factor(interval, intervals, span);
        prop_assert!((0.25..=4.0).contains(&f));
    }

    #[test]
    fn race_profile_non_increasing_and_bounded(attacker in 0.01_f64..0.45, seed in 0_u64..1000) {
        let rs = attacker_race_profile(1.0 - attacker, attacker, &[1, 2, 3, 4], 300, 2_000, seed);
        prop_assert!(rs.windows(2).all(|w| w[1].successes <= w[0].successes));
        prop_assert!(rs.iter().all(|r| (0.0..=1.0).contains(&r.frequency)));
        prop_assert!(gamblers_ruin(1.0 - attacker, attacker, 2) < gamblers_ruin(1.0 - attacker, attacker, 1));
    }
}

fn store_params() -> ChainParams {
    ChainParams {
        genesis_target: DifficultyTarget {
            n: 8,
            density_pct: 50.0,
            sa_sweeps: 10,
            ..Default::default()
        },
        target_interval: 10.0,
        window: 4,
        verify: VerifyMode::Linkage,
    }
}

fn child(store: &BlockStore, parent: &[u8; 32], ts: u64, tag: u64) -> Block {
    let txs = vec![Transaction::new(tag.to_le_bytes().to_vec()).unwrap()];
    let header = BlockHeader {
        version: BLOCK_VERSION,
        prev_id: *parent,
        merkle_root: merkle_root(&txs).unwrap(),
        timestamp: ts,
        target: store.next_target(parent).unwrap(),
        nonce: 0,
    };
    Block::new(
        header,
        txs,
        Solution {
            mode: Mode::Qubo,
            encoded: vec![0],
            claimed_objective: 0.0,
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Grows a random tree, delivering blocks in a shuffled order, and checks
    /// the incremental tip against a full scan after every append.
    #[test]
    fn tip_always_matches_fork_choice(parents in prop::collection::vec(any::<prop::sample::Index>(), 1..40), order_seed in any::<u64>()) {
        let mut builder = BlockStore::new(store_params()).unwrap();
        let mut ids = vec![builder.genesis_id()];
        let mut blocks = Vec::new();
        for (k, p) in parents.iter().enumerate() {
            let parent = ids[p.index(ids.len())];
            let h = builder.height(&parent).unwrap();
            let b = child(&builder, &parent, (h + 1) * 10 + k as u64 % 3, k as u64);
            ids.push(b.block_id);
            blocks.push(b.clone());
            let accepted = matches!(builder.append(b), AppendOutcome::Accepted { .. });
            prop_assert!(accepted);
        }
        // Deterministic shuffle so orphans show up.
        let mut order: Vec<usize> = (0..blocks.len()).collect();
        let mut x = order_seed | 1;
        for i in (1..order.len()).rev() {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            order.swap(i, (x % (i as u64 + 1)) as usize);
        }
        let mut store = BlockStore::new(store_params()).unwrap();
        for &i in &order {
            store.append(blocks[i].clone());
            prop_assert_eq!(store.tip(), store.fork_choice());
            let tip_h = store.tip_height();
            prop_assert!(store.main_chain().len() as u64 == tip_h + 1);
        }
        prop_assert_eq!(store.orphan_count(), 0);
        prop_assert_eq!(store.tip_height(), builder.tip_height());

        let mut bytes = Vec::new();
        store.write_to(&mut bytes).unwrap();
        let back = BlockStore::read_from(store_params(), bytes.as_slice()).unwrap();
        prop_assert_eq!(back.tip(), store.tip());
        let mut file = Vec::new();
        builder.write_to(&mut file).unwrap();
        let reread = BlockStore::read_from(store_params(), file.as_slice()).unwrap();
        let mut again = Vec::new();
        reread.write_to(&mut again).unwrap();
        prop_assert_eq!(again, file);
        prop_assert_eq!(reread.tip(), builder.tip());
    }
}
