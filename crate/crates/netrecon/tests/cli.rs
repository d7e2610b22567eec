use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn netrecon(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netrecon"))
        .args(args)
        .env("NETRECON_OUTPUT_DIR", root)
        .output()
        .unwrap()
}

fn ok(root: &Path, args: &[&str]) {
    let out = netrecon(root, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn pipeline_from_network_to_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    ok(root, &["--seed", "5", "generate", "--model", "erdos-renyi", "--n", "15", "--p", "0.25", "-o", "g.txt"]);
    let sidecar = json(&root.join("g.json"));
    assert_eq!(sidecar["seed"], 5);
    assert_eq!(sidecar["spec"]["model"], "erdos_renyi");
    assert_eq!(sidecar["nodes"], 15);

    ok(root, &["--seed", "5", "simulate", "--graph", "g.txt", "--gamma", "0.2", "--beta", "0.15", "--steps", "300", "-o", "x.csv"]);
    let csv = std::fs::read_to_string(root.join("x.csv")).unwrap();
    assert_eq!(csv.lines().count(), 301);
    assert!(csv.lines().all(|l| l.split(',').count() == 15));

    ok(root, &[
        "--seed", "5", "--threads", "1", "infer", "--states", "x.csv", "--truth", "g.txt",
        "--burn-in", "3000", "--thinning", "20", "--samples", "100", "--chains", "2", "-o", "post",
    ]);
    let summary = json(&root.join("post/summary.json"));
    assert_eq!(summary["version"], 1);
    assert_eq!(summary["total_samples"], 200);
    assert_eq!(summary["conditioned_on"]["graph"], "truth");
    assert_eq!(summary["contagion"].as_array().unwrap().len(), 15);
    let hdpi = summary["gamma"]["hdpi"].as_array().unwrap();
    assert!(hdpi[0].as_f64().unwrap() < 0.2 + 0.1 && hdpi[1].as_f64().unwrap() > 0.2 - 0.1);
    let samples = std::fs::read_to_string(root.join("post/samples.jsonl")).unwrap();
    assert_eq!(samples.lines().count(), 200);

    ok(root, &["evaluate", "--truth", "g.txt", "--samples", "post/samples.jsonl", "-o", "metrics.json"]);
    let metrics = json(&root.join("metrics.json"));
    let auroc = metrics["auroc"].as_f64().unwrap();
    assert!(auroc > 0.5, "auroc {auroc}");
    assert!(metrics.as_object().unwrap().values().all(|v| v.is_number()));
}

#[test]
fn same_seed_same_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for root in [a.path(), b.path()] {
        ok(root, &["--seed", "9", "generate", "--model", "powerlaw-cm", "--n", "40", "--alpha", "-2.5", "-o", "g.txt"]);
        ok(root, &["--seed", "9", "simulate", "--graph", "g.txt", "--gamma", "0.1", "--contagion", "threshold", "--tau", "2", "--beta", "0.3", "--steps", "50", "--initial-fraction", "0.3", "-o", "x.csv"]);
    }
    for f in ["g.txt", "g.json", "x.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn calibrate_writes_result() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    ok(root, &["generate", "--model", "zkc", "-o", "zkc.txt"]);
    ok(root, &[
        "--seed", "2", "calibrate", "--graph", "zkc.txt", "--gamma", "0.1", "--reference-beta", "0.04",
        "--steps", "50", "--replicates", "10", "--batch", "2", "--max-iterations", "40", "-o", "cal.json",
    ]);
    let cal = json(&root.join("cal.json"));
    let beta = cal["result"]["beta"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&beta));
    assert_eq!(cal["template"]["kind"], "threshold");
}

#[test]
fn experiment_writes_grid_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/smoke.toml");
    let config = config.to_str().unwrap();
    ok(root, &["experiment", "--config", config, "-o", "run"]);
    let first = std::fs::read(root.join("run/results.csv")).unwrap();
    let out = netrecon(root, &["--resume", "experiment", "--config", config, "-o", "run"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("8 resumed"));
    assert_eq!(std::fs::read(root.join("run/results.csv")).unwrap(), first);

    // A different seed is a different config.
    let out = netrecon(root, &["--seed", "99", "--resume", "experiment", "--config", config, "-o", "run"]);
    assert!(!out.status.success());

    ok(root, &["experiment", "--write-config", "default.toml"]);
    assert!(std::fs::read_to_string(root.join("default.toml")).unwrap().contains("version = 1"));
}

#[test]
fn bad_arguments_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let out = netrecon(root, &["generate", "--model", "erdos-renyi", "--n", "10", "-o", "g.txt"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--p"));
    let out = netrecon(root, &["simulate", "--graph", "missing.txt", "--gamma", "0.1", "--beta", "0.1", "--steps", "5", "-o", "x.csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.txt"));
    let out = netrecon(root, &["generate", "--model", "zkc", "-o", "z.txt", "--seed", "1"]);
    assert!(out.status.success());
    let out = netrecon(root, &["simulate", "--graph", "z.txt", "--gamma", "1.5", "--beta", "0.1", "--steps", "5", "-o", "x.csv"]);
    assert!(!out.status.success());
}
