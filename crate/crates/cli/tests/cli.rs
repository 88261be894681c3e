use std::process::{Command, Output};

fn mimo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mimo-dof")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn dof_examples() {
    assert_eq!(stdout(&mimo(&["dof", "--config", "1,3,3,1"])), "1\n");
    assert_eq!(stdout(&mimo(&["dof", "--config", "1,3,3,1", "--scenario", "0,1,0,0"])), "3\n");
    let o = mimo(&["dof", "--config", "2,2,2,2", "--cooperation", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["eta"], 2);
    assert_eq!(v["bounds"], serde_json::json!([2, 2]));
}

#[test]
fn bad_config_is_usage_error() {
    let o = mimo(&["dof", "--config", "0,1,1,1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("m1"));
    assert_eq!(mimo(&["verify", "--max-antennas", "0"]).status.code(), Some(2));
    assert_eq!(mimo(&["dof", "--config", "1,1,1,1", "--scenario", "0,2,0,0"]).status.code(), Some(2));
}

#[test]
fn region_csv() {
    let o = mimo(&["region", "--config", "1,3,3,1", "--scenario", "0,1,0,0", "--format", "csv"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.starts_with("region,d1,d2\n"));
    assert!(s.contains("outer,2/1,1/1\n"));
}

#[test]
fn verify_small_sweep_passes() {
    let o = mimo(&["verify", "--max-antennas", "2", "--which", "all"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("PASS region_equality: 256 checks"));
    assert!(s.ends_with("PASS\n"));
}

#[test]
fn achieve_exit_codes() {
    let o = mimo(&["achieve", "--config", "2,2,2,2", "--point", "2,1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not in the achievable set"));
    let o = mimo(&["achieve", "--config", "2,2,2,2", "--point", "1,1", "--trials", "0"]);
    assert!(o.status.success());
    let o = mimo(&["achieve", "--config", "2,2,2,2", "--scenario", "1,1,0,0", "--point", "2,2", "--trials", "5"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("5/5 trials pass"));
}

#[test]
fn simulate_writes_files_to_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_mimo-dof"))
        .args(["simulate", "--config", "2,2,2,2", "--point", "1,1", "--trials", "3"])
        .env(mimo_dof_cli::OUT_DIR_ENV, dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("eta 2"));
    let stem = dir.path().join("simulate_2-2-2-2_0000_1-1");
    let csv = std::fs::read_to_string(stem.with_extension("csv")).unwrap();
    assert!(csv.starts_with("rho,r1,r2,rsum\n"));
    assert_eq!(csv.lines().count(), 8);
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json")).unwrap()).unwrap();
    for key in ["slope", "intercept", "config", "scenario", "point"] {
        assert!(side.get(key).is_some(), "{key}");
    }
}

#[test]
fn simulate_targets_the_requested_point() {
    // (1,0) is not a sum-DOF point; its slope is checked against 1
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("x");
    let o = mimo(&["simulate", "--config", "2,2,2,2", "--point", "1,0", "--trials", "2", "--out", stem.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("target 1"));
}

#[test]
fn coop_bound_precondition_and_output_file() {
    let o = mimo(&["coop-bound", "--config", "3,1,1,2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("N2 >= M1"));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("coop.json");
    let o = mimo(&["coop-bound", "--config", "2,2,2,2", "--trials", "2", "--format", "json", "--output", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["dof_cooperation"], 2);
}
