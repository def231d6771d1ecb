use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn gibbs_tv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gibbs-tv")).args(args).output().unwrap()
}

#[test]
fn bound_prints_report_to_stdout() {
    let s = scenario("poisson_vs_hard_core.json");
    let out = gibbs_tv(&["bound", "--scenario", s.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let b = v["bound"].as_f64().unwrap();
    assert!((b - 0.1256637061435917).abs() < 1e-12, "{v}");
}

#[test]
fn verify_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("strauss_gamma_pair.json");
    let out = gibbs_tv(&[
        "verify",
        "--scenario",
        s.to_str().unwrap(),
        "--reps",
        "300",
        "--seed",
        "5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(v["ordering_ok"], serde_json::Value::Bool(true));
    assert!(out.stdout.is_empty());
}

#[test]
fn vacuous_sweep_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("strauss_discretization.json");
    let out = gibbs_tv(&["discretize", "--scenario", s.to_str().unwrap(), "--reps", "100", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn simulate_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("strauss_range_pair.json");
    let out = gibbs_tv(&["simulate", "--scenario", s.to_str().unwrap(), "--reps", "20", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let traj = std::fs::read_to_string(dir.path().join("trajectory.jsonl")).unwrap();
    assert!(traj.lines().count() > 0);
    for line in traj.lines() {
        serde_json::from_str::<serde_json::Value>(line).unwrap();
    }
}

#[test]
fn invalid_scenario_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"model_xi": {}, "task": "bound"}"#).unwrap();
    let out = gibbs_tv(&["bound", "--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
    let missing = gibbs_tv(&["bound", "--scenario", dir.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(1));
}
