//! End-to-end runs of the `qwalk` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qwalk(args: &[&str], workers: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qwalk"));
    cmd.args(args).env_remove("QWALK_WORKERS");
    if let Some(w) = workers {
        cmd.env("QWALK_WORKERS", w);
    }
    cmd.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn gen_torus(dir: &Path) -> String {
    let path = dir.join("torus.json");
    let p = path.to_str().unwrap().to_string();
    let out = qwalk(&["gen", "--family", "torus", "--side", "5", "-o", &p], None);
    assert!(out.status.success());
    p
}

#[test]
fn generate_and_hit() {
    let dir = tempfile::tempdir().unwrap();
    let chain = gen_torus(dir.path());
    let v = json(&qwalk(&["hitting-time", "--chain", &chain, "--mc-samples", "500", "--seed", "2"], None));
    let (ht, ht_plus) = (v["ht"].as_f64().unwrap(), v["ht_plus"].as_f64().unwrap());
    assert!((ht - ht_plus).abs() < 1e-6 * ht);
    assert!(v["mc_estimate"].as_f64().unwrap() > 0.0);
}

#[test]
fn both_searches() {
    let dir = tempfile::tempdir().unwrap();
    let chain = gen_torus(dir.path());
    let cg = json(&qwalk(&["search", "cg-prime", "--chain", &chain, "--marked", "3"], None));
    assert_eq!(cg["diagnostics"]["w"].as_u64(), Some(3));
    assert!(cg["t2"].as_f64().unwrap() <= cg["t1"].as_f64().unwrap());
    let ip = json(&qwalk(&["search", "interpolated", "--chain", &chain, "--epsilon", "0.1"], None));
    assert!(ip["success_probability"].as_f64().unwrap() >= 0.15);
    let sampled = json(&qwalk(
        &["search", "interpolated", "--chain", &chain, "--mode", "sampled", "--samples", "200", "--seed", "5"],
        None,
    ));
    assert_eq!(sampled["samples"].as_u64(), Some(200));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let chain = gen_torus(dir.path());
    let bad_eps = qwalk(&["search", "interpolated", "--chain", &chain, "--epsilon", "0.3"], None);
    assert_eq!(bad_eps.status.code(), Some(2));
    let missing = qwalk(&["gen", "--family", "cycle"], None);
    assert_eq!(missing.status.code(), Some(2));
    let bad_file = dir.path().join("bad.json");
    std::fs::write(&bad_file, r#"{"n": 2, "p": [[0.5, 0.6], [0.5, 0.5]], "marked": [0]}"#).unwrap();
    let rows = qwalk(&["hitting-time", "--chain", bad_file.to_str().unwrap()], None);
    assert_eq!(rows.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&rows.stderr).contains("row 0"));
}

#[test]
fn sweep_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("complete.csv");
    let cfg = dir.path().join("sweep.json");
    let body = serde_json::json!({
        "family": {"family": "complete"},
        "sizes": [16, 32, 64, 128],
        "algorithm": "interpolated",
        "epsilon_precision": 0.1,
        "output": csv,
    });
    std::fs::write(&cfg, body.to_string()).unwrap();
    let rows = json(&qwalk(&["sweep", "--config", cfg.to_str().unwrap()], Some("2")));
    assert_eq!(rows.as_array().unwrap().len(), 4);
    let first = std::fs::read_to_string(&csv).unwrap();
    assert!(dir.path().join("complete.report.json").exists());

    json(&qwalk(&["sweep", "--config", cfg.to_str().unwrap(), "--workers", "1"], None));
    let second = std::fs::read_to_string(&csv).unwrap();
    let body = |s: &str| s.lines().skip(1).map(String::from).collect::<Vec<_>>();
    assert_eq!(body(&first), body(&second));

    let fit = json(&qwalk(&["fit", "--csv", csv.to_str().unwrap(), "--x", "n", "--y", "T"], None));
    let exponent = fit["exponent"].as_f64().unwrap();
    assert!((exponent - 0.5).abs() < 0.05, "{exponent}");
    let short = qwalk(&["fit", "--csv", csv.to_str().unwrap(), "--x", "n", "--y", "mu"], None);
    assert_eq!(short.status.code(), Some(2));
}
