use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn emsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emsim"))
        .current_dir(dir)
        .env_remove("EMSIM_SEED")
        .args(args)
        .output()
        .expect("spawn emsim")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse().unwrap_or(f64::NAN)).collect())
        .collect()
}

#[test]
fn missing_config_is_io_error() {
    let dir = TempDir::new().unwrap();
    let out = emsim(dir.path(), &["validate", "--config", "nope.json"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("emsim: "));
}

#[test]
fn malformed_and_unknown_keys_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", "{ not json");
    assert_eq!(code(&emsim(dir.path(), &["validate", "--config", &bad])), 1);
    let unknown = write(&dir, "unknown.json", r#"{"channel": {"alpha": 3}}"#);
    assert_eq!(code(&emsim(dir.path(), &["validate", "--config", &unknown])), 1);
}

#[test]
fn constraint_violation_names_the_key() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", r#"{"channel": {"path_loss_exponents": [0.5]}}"#);
    let out = emsim(dir.path(), &["validate", "--config", &cfg]);
    assert_eq!(code(&out), 3);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("channel.path_loss_exponents[0]"), "{err}");
    assert!(err.contains("≥ 1"), "{err}");
}

#[test]
fn no_relay_candidate_is_scenario_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", r#"{"topology": {"relay_candidates": {"count": 0}}}"#);
    let out = emsim(dir.path(), &["compare", "--config", &cfg]);
    assert_eq!(code(&out), 3);
    assert!(!dir.path().join("compare.csv").exists());
}

#[test]
fn unwritable_output_is_io_error() {
    let dir = TempDir::new().unwrap();
    let out = emsim(dir.path(), &["sweep", "--out", "missing/dir/x.csv"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn bad_arguments_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&emsim(dir.path(), &["sweep", "--hop", "4"])), 1);
    assert_eq!(code(&emsim(dir.path(), &["frobnicate"])), 1);
    assert_eq!(code(&emsim(dir.path(), &["--help"])), 0);
}

#[test]
fn default_output_names() {
    let dir = TempDir::new().unwrap();
    for args in [&["sweep", "--hop", "chain"][..], &["compare"], &["topology"]] {
        assert_eq!(code(&emsim(dir.path(), args)), 0);
    }
    for name in ["sweep_hopchain.csv", "compare.csv", "topology.json"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn seed_flag_beats_environment() {
    let dir = TempDir::new().unwrap();
    let run = |env: Option<&str>, flag: Option<&str>, name: &str| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_emsim"));
        c.current_dir(dir.path()).env_remove("EMSIM_SEED");
        if let Some(e) = env {
            c.env("EMSIM_SEED", e);
        }
        c.args(["topology", "--out", name]);
        if let Some(f) = flag {
            c.args(["--seed", f]);
        }
        assert!(c.status().unwrap().success());
        std::fs::read(dir.path().join(name)).unwrap()
    };
    let env_only = run(Some("5"), None, "a.json");
    let flag_only = run(None, Some("5"), "b.json");
    let both = run(Some("9"), Some("5"), "c.json");
    let other = run(Some("9"), None, "d.json");
    assert_eq!(env_only, flag_only);
    assert_eq!(both, flag_only);
    assert_ne!(other, flag_only);
}

#[test]
fn printed_config_round_trips() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", r#"{"seed": 3, "selection": {"energy_weight": 0.7, "quality_weight": 0.3}}"#);
    assert_eq!(code(&emsim(dir.path(), &["validate", "--config", &cfg, "--print-config", "--out", "full.json"])), 0);
    assert_eq!(
        code(&emsim(dir.path(), &["validate", "--config", "full.json", "--print-config", "--out", "again.json"])),
        0
    );
    let a = std::fs::read_to_string(dir.path().join("full.json")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("again.json")).unwrap();
    assert_eq!(a, b);
    assert!(a.contains("\"energy_weight\": 0.7"));
}

#[test]
fn sweep_csv_is_self_consistent() {
    let dir = TempDir::new().unwrap();
    for hop in ["1", "2", "3", "chain"] {
        assert_eq!(code(&emsim(dir.path(), &["sweep", "--hop", hop, "--out", "s.csv"])), 0);
        let text = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "hop,distance_m,alpha,bandwidth_hz,tx_power_w,sinr_linear,capacity_bps,ee_bits_per_joule"
        );
        for r in rows(&text) {
            let (bw, p, sinr, cap, ee) = (r[3], r[4], r[5], r[6], r[7]);
            let expected_cap = bw * (1.0 + sinr).log2();
            assert!(((cap - expected_cap) / expected_cap).abs() < 1e-9, "hop {hop}: {r:?}");
            // Three links per chain by default.
            let expected_ee = cap / (3.0 * p);
            assert!(((ee - expected_ee) / expected_ee).abs() < 1e-9, "hop {hop}: {r:?}");
        }
    }
}

#[test]
fn compare_ratio_is_at_least_one() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&emsim(dir.path(), &["compare", "--seed", "11"])), 0);
    let text = std::fs::read_to_string(dir.path().join("compare.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "distance_m,alpha,ee_proposed,ee_baseline,ee_ratio");
    let rows = rows(&text);
    assert!(!rows.is_empty());
    for r in rows {
        assert!(r[4] >= 1.0, "{r:?}");
        assert!((r[4] - r[2] / r[3]).abs() < 1e-12);
    }
}

#[test]
fn topology_json_shape() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&emsim(dir.path(), &["topology", "--out", "t.json"])), 0);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("t.json")).unwrap()).unwrap();
    let nodes = v["nodes"].as_array().unwrap();
    assert_eq!(nodes[0]["role"], "base_station");
    assert!(nodes[0]["residual_energy_j"].is_null());
    for n in nodes {
        for key in ["id", "role", "x_m", "y_m", "tx_power_w", "residual_energy_j"] {
            assert!(n.get(key).is_some(), "{key}");
        }
    }
    assert_eq!(v["coverage_radius_m"], 1000.0);
    let relay = v["selection"]["relay"].as_u64().unwrap();
    assert!(nodes.iter().any(|n| n["id"] == relay && n["role"] == "relay"));
    assert!(!v["selection"]["cluster_heads"].as_array().unwrap().is_empty());
}
