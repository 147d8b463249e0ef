//! End-to-end runs of the `csbm` binary: seeded reproducibility, exit codes,
//! and the threshold report on a closed-form case.

use std::path::Path;
use std::process::{Command, Output};

fn csbm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_csbm"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

const FIG1A_CONFIG: &str = r#"{
    "n": 200, "k": 2,
    "edges": {"alpha_in": 12.0, "alpha_out": 1.0},
    "attributes": {
        "family": {"kind": "gaussian", "params": {"sigma2": 1.0, "dim": 2}},
        "radius": 1.0, "radius_scale": "sqrt_log_n"
    }
}"#;

#[test]
fn generate_cluster_evaluate_pipeline_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("model.json"), FIG1A_CONFIG).unwrap();

    for round in ["a", "b"] {
        let out = csbm(
            &["generate", "--config", "model.json", "--seed", "7", "--out", round],
            dir,
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let out = csbm(
            &[
                "cluster",
                "--edges",
                &format!("{round}/edges.txt"),
                "--attributes",
                &format!("{round}/attributes.csv"),
                "--k",
                "2",
                "--seed",
                "7",
                "--out",
                &format!("{round}/fit"),
            ],
            dir,
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }

    // byte-identical artifacts across reruns
    for file in ["edges.txt", "attributes.csv", "labels.txt"] {
        let a = std::fs::read(dir.join("a").join(file)).unwrap();
        let b = std::fs::read(dir.join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between reruns");
    }
    let a = std::fs::read(dir.join("a/fit/labels.txt")).unwrap();
    let b = std::fs::read(dir.join("b/fit/labels.txt")).unwrap();
    assert_eq!(a, b);

    // evaluation: strong signal, the fit matches the truth
    let out = csbm(
        &["evaluate", "--truth", "a/labels.txt", "--pred", "a/fit/labels.txt"],
        dir,
    );
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["exact"], serde_json::json!(true), "report: {v}");
    assert_eq!(v["loss"], serde_json::json!(0));
}

#[test]
fn threshold_reports_example2_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    // alpha = 9, beta = 1, K = 2, no attribute separation, large n:
    // scaled divergence (sqrt 9 - 1)^2 / 2 = 2, verdict Possible
    let config = r#"{
        "n": 1000000, "k": 2,
        "edges": {"alpha_in": 9.0, "alpha_out": 1.0},
        "attributes": {
            "family": {"kind": "gaussian", "params": {"sigma2": 1.0, "dim": 2}},
            "radius": 0.0, "radius_scale": "sqrt_log_n"
        }
    }"#;
    std::fs::write(dir.join("model.json"), config).unwrap();
    let out = csbm(
        &["threshold", "--config", "model.json", "--curves", "curves.csv"],
        dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let scaled = v["scaled"].as_f64().unwrap();
    assert!((scaled - 2.0).abs() < 5e-3, "scaled {scaled}");
    assert_eq!(v["verdict"], serde_json::json!("Possible"));

    let curves = std::fs::read_to_string(dir.join("curves.csv")).unwrap();
    assert!(curves.starts_with("# csbm v"));
    assert!(curves.lines().nth(1).unwrap().starts_with("t,ch_0_1"));
    assert!(curves.lines().count() > 500);
}

#[test]
fn validation_failures_exit_with_code_2() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    // unknown family name in the config
    let bad = r#"{
        "n": 100, "k": 2,
        "edges": {"alpha_in": 2.0, "alpha_out": 1.0},
        "attributes": {"family": {"kind": "weibull"}, "radius": 1.0}
    }"#;
    std::fs::write(dir.join("bad.json"), bad).unwrap();
    let out = csbm(&["threshold", "--config", "bad.json"], dir);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("weibull"), "stderr: {stderr}");

    // malformed edge file (self-loop) fails cluster with line info
    std::fs::write(dir.join("edges.txt"), "# csbm-edges v1 n=4\n3 3 1.0\n").unwrap();
    std::fs::write(dir.join("attributes.csv"), "y0\n1\n2\n3\n4\n").unwrap();
    let out = csbm(
        &[
            "cluster",
            "--edges",
            "edges.txt",
            "--attributes",
            "attributes.csv",
            "--k",
            "2",
        ],
        dir,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    // zero-trial plan
    let plan = r#"{
        "base": {
            "n": 50, "k": 2,
            "edges": {"alpha_in": 2.0, "alpha_out": 1.0},
            "attributes": {"family": {"kind": "gaussian", "params": {"dim": 2}}, "radius": 1.0}
        },
        "axes": [{"param": "alpha_in", "values": [1.0]}],
        "trials": 0,
        "seed": 1
    }"#;
    std::fs::write(dir.join("plan.json"), plan).unwrap();
    let out = csbm(&["compare", "--config", "plan.json"], dir);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn experiment_outputs_are_worker_count_invariant() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let plan = r#"{
        "base": {
            "n": 80, "k": 2,
            "edges": {"alpha_in": 8.0, "alpha_out": 1.0},
            "attributes": {"family": {"kind": "gaussian", "params": {"dim": 2}},
                            "radius": 1.2, "radius_scale": "sqrt_log_n"}
        },
        "axes": [
            {"param": "alpha_in", "values": [2.0, 8.0]},
            {"param": "attr_radius", "values": [0.2, 1.2]}
        ],
        "trials": 4,
        "seed": 99
    }"#;
    std::fs::write(dir.join("plan.json"), plan).unwrap();

    for (tag, workers) in [("w1", "1"), ("w3", "3")] {
        let out = csbm(
            &["phase-diagram", "--config", "plan.json", "--workers", workers, "--out", tag],
            dir,
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for file in ["phase.csv", "curve.csv"] {
        let a = std::fs::read(dir.join("w1").join(file)).unwrap();
        let b = std::fs::read(dir.join("w3").join(file)).unwrap();
        assert_eq!(a, b, "{file} depends on worker count");
    }

    let phase = std::fs::read_to_string(dir.join("w1/phase.csv")).unwrap();
    assert!(phase.starts_with("# csbm v"), "provenance header missing");
    assert_eq!(phase.lines().count(), 2 + 4, "one row per cell");
}

#[test]
fn compare_runs_internal_baselines() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let plan = r#"{
        "base": {
            "n": 90, "k": 2,
            "edges": {"alpha_in": 10.0, "alpha_out": 1.0},
            "attributes": {"family": {"kind": "gaussian", "params": {"dim": 2}},
                            "radius": 1.5, "radius_scale": "sqrt_log_n"}
        },
        "axes": [{"param": "alpha_in", "values": [10.0]}],
        "trials": 3,
        "seed": 5,
        "metric": "mean_ari"
    }"#;
    std::fs::write(dir.join("plan.json"), plan).unwrap();
    let out = csbm(&["compare", "--config", "plan.json", "--out", "cmp"], dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(dir.join("cmp/comparison.csv")).unwrap();
    for method in ["algorithm1", "network_spectral", "attribute_bregman"] {
        assert!(table.contains(method), "missing {method} in:\n{table}");
    }
}
