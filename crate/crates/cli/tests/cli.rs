use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn hamchain(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hamchain"))
        .current_dir(dir)
        .env_remove("HAMCHAIN_CONFIG")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn assert_status(o: &Output, code: i32) {
    assert_eq!(
        o.status.code(),
        Some(code),
        "stdout:\n{}\nstderr:\n{}",
        stdout(o),
        stderr(o)
    );
}

/// A config with a small target so mining in tests stays quick.
fn small_config(dir: &Path) -> String {
    let path = dir.join("config.json");
    std::fs::write(
        &path,
        r#"{"seed": 3, "target": {"n": 12, "density_pct": 50.0, "sa_sweeps": 10}, "sa": {"sweeps": 200, "restarts": 2}}"#,
    )
    .unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn mined_block_verifies_and_tampering_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path());
    let o = hamchain(
        dir.path(),
        &["--config", &cfg, "mine", "--tx", "hello", "-o", "block.bin"],
    );
    assert_status(&o, 0);
    let o = hamchain(dir.path(), &["--config", &cfg, "verify", "block.bin"]);
    assert_status(&o, 0);
    assert!(stdout(&o).starts_with("valid block"));

    let original = std::fs::read(dir.path().join("block.bin")).unwrap();
    // Bytes inside the timestamp and inside the trailing solution.
    for offset in [70, original.len() - 1] {
        let mut bytes = original.clone();
        bytes[offset] ^= 0x01;
        std::fs::write(dir.path().join("bad.bin"), &bytes).unwrap();
        let o = hamchain(dir.path(), &["--config", &cfg, "verify", "bad.bin"]);
        assert_status(&o, 1);
        assert!(stderr(&o).starts_with("rejected: "), "{}", stderr(&o));
    }

    let mut truncated = original.clone();
    truncated.truncate(original.len() / 2);
    std::fs::write(dir.path().join("short.bin"), &truncated).unwrap();
    let o = hamchain(dir.path(), &["--config", &cfg, "verify", "short.bin"]);
    assert_status(&o, 1);
    assert!(stderr(&o).contains("malformed"), "{}", stderr(&o));
}

#[test]
fn verify_under_a_different_target_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path());
    assert_status(
        &hamchain(dir.path(), &["--config", &cfg, "mine", "-o", "b.bin"]),
        0,
    );
    // Default target has a different genesis, so the parent is unknown.
    let o = hamchain(dir.path(), &["verify", "b.bin"]);
    assert_status(&o, 1);
    assert!(stderr(&o).contains("unknown-parent"), "{}", stderr(&o));
}

#[test]
fn chain_lifecycle() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path());
    assert_status(
        &hamchain(dir.path(), &["--config", &cfg, "chain", "init", "c.chain"]),
        0,
    );
    let o = hamchain(dir.path(), &["--config", &cfg, "chain", "init", "c.chain"]);
    assert_status(&o, 2);
    for _ in 0..3 {
        assert_status(
            &hamchain(
                dir.path(),
                &["--config", &cfg, "mine", "--chain", "c.chain"],
            ),
            0,
        );
    }
    let o = hamchain(
        dir.path(),
        &[
            "--config", &cfg, "mine", "--chain", "c.chain", "-o", "next.bin",
        ],
    );
    assert_status(&o, 0);

    let o = hamchain(
        dir.path(),
        &["--config", &cfg, "--json", "chain", "validate", "c.chain"],
    );
    assert_status(&o, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["height"], 4);
    assert_eq!(v["valid"], true);

    let o = hamchain(
        dir.path(),
        &["--config", &cfg, "--json", "chain", "show", "c.chain"],
    );
    assert_status(&o, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["blocks"].as_array().unwrap().len(), 5);

    // The last block is on the chain, so its parent is known there.
    assert_status(
        &hamchain(
            dir.path(),
            &["--config", &cfg, "verify", "next.bin", "--chain", "c.chain"],
        ),
        0,
    );

    // Corrupt one stored block; validation names it.
    let path = dir.path().join("c.chain");
    let mut bytes = std::fs::read(&path).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 0x80;
    std::fs::write(&path, &bytes).unwrap();
    let o = hamchain(
        dir.path(),
        &["--config", &cfg, "chain", "validate", "c.chain"],
    );
    assert_status(&o, 1);
    assert!(stderr(&o).starts_with("rejected: "), "{}", stderr(&o));
}

#[test]
fn brute_force_beyond_cap_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    assert_status(
        &hamchain(dir.path(), &["gen", "--n", "25", "-o", "big.txt"]),
        0,
    );
    let o = hamchain(dir.path(), &["solve", "big.txt", "--solver", "brute"]);
    assert_status(&o, 2);
    assert!(stderr(&o).contains("24"), "{}", stderr(&o));
    assert!(stderr(&o).contains("usage:"));
}

#[test]
fn solvers_agree_with_exhaustive_search_on_small_instance() {
    let dir = TempDir::new().unwrap();
    assert_status(
        &hamchain(
            dir.path(),
            &["--seed", "9", "gen", "--n", "10", "-o", "i.txt"],
        ),
        0,
    );
    let objective = |solver: &str| {
        let o = hamchain(
            dir.path(),
            &["--json", "solve", "i.txt", "--solver", solver],
        );
        assert_status(&o, 0);
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        v["objective"].as_f64().unwrap()
    };
    let best = objective("brute");
    assert!(objective("sa") <= best + 1e-9);
    assert!(objective("gdsim") <= best + 1e-9);

    let o = hamchain(dir.path(), &["solve", "i.txt", "--solver", "grid"]);
    assert_status(&o, 2);
    let o = hamchain(
        dir.path(),
        &[
            "--json", "solve", "i.txt", "--solver", "gdsim", "--mode", "qco",
        ],
    );
    assert_status(&o, 0);
    assert!(stdout(&o).contains("phases"));
}

#[test]
fn gen_is_deterministic_per_seed() {
    let dir = TempDir::new().unwrap();
    let a = hamchain(dir.path(), &["--seed", "4", "gen", "--n", "12"]);
    let b = hamchain(dir.path(), &["--seed", "4", "gen", "--n", "12"]);
    let c = hamchain(dir.path(), &["--seed", "5", "gen", "--n", "12"]);
    assert_status(&a, 0);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn bench_output_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let args = ["bench", "--sizes", "8,10", "--instances", "2"];
    let a = hamchain(dir.path(), &args);
    let b = hamchain(dir.path(), &args);
    assert_status(&a, 0);
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("exact optimum"));
    assert_status(&hamchain(dir.path(), &["bench", "--sizes", "30"]), 2);
}

#[test]
fn config_is_strict_and_found_through_the_environment() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"seed": 1, "sa": {"sweeps": 10, "sweps": 3}}"#).unwrap();
    let o = hamchain(
        dir.path(),
        &["--config", bad.to_str().unwrap(), "gen", "--n", "8"],
    );
    assert_status(&o, 2);
    assert!(stderr(&o).contains("sweps"), "{}", stderr(&o));

    let good = dir.path().join("good.json");
    std::fs::write(&good, r#"{"seed": 77}"#).unwrap();
    let via_flag = hamchain(
        dir.path(),
        &["--config", good.to_str().unwrap(), "gen", "--n", "8"],
    );
    let via_env = Command::new(env!("CARGO_BIN_EXE_hamchain"))
        .current_dir(dir.path())
        .env("HAMCHAIN_CONFIG", &good)
        .args(["gen", "--n", "8"])
        .output()
        .unwrap();
    let via_seed = hamchain(dir.path(), &["--seed", "77", "gen", "--n", "8"]);
    assert_status(&via_env, 0);
    assert_eq!(via_flag.stdout, via_env.stdout);
    assert_eq!(via_flag.stdout, via_seed.stdout);

    let o = hamchain(dir.path(), &["--config", "missing.json", "gen"]);
    assert_status(&o, 2);
}

#[test]
fn simulate_reports_metrics_and_series() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("s.json"),
        r#"{"nodes": [{"power": 1.0}, {"power": 2.0}], "horizon": 60.0, "seed": 2}"#,
    )
    .unwrap();
    let o = hamchain(
        dir.path(),
        &["--json", "simulate", "s.json", "--csv", "series.csv"],
    );
    assert_status(&o, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["tips_agree"], true);
    assert!(v["main_chain_height"].as_u64().unwrap() > 0);
    let csv = std::fs::read_to_string(dir.path().join("series.csv")).unwrap();
    assert!(csv.lines().count() > 1);

    let again = hamchain(dir.path(), &["--json", "simulate", "s.json"]);
    assert_eq!(o.stdout, again.stdout);
    let reseeded = hamchain(dir.path(), &["--json", "--seed", "3", "simulate", "s.json"]);
    assert_ne!(o.stdout, reseeded.stdout);

    // Scenario path taken from the config, relative to the config file.
    std::fs::write(dir.path().join("c.json"), r#"{"scenario": "s.json"}"#).unwrap();
    let cfg = dir.path().join("c.json");
    let via_cfg = Command::new(env!("CARGO_BIN_EXE_hamchain"))
        .env("HAMCHAIN_CONFIG", &cfg)
        .args(["--json", "simulate"])
        .output()
        .unwrap();
    assert_eq!(o.stdout, via_cfg.stdout);

    std::fs::write(dir.path().join("typo.json"), r#"{"horizn": 5}"#).unwrap();
    assert_status(&hamchain(dir.path(), &["simulate", "typo.json"]), 2);
    assert_status(&hamchain(dir.path(), &["simulate"]), 2);
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    assert_status(&hamchain(dir.path(), &["frobnicate"]), 2);
}
