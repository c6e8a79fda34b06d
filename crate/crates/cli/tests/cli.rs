use std::process::{Command, Output};

use ellipsoid_lab::states::{self, StateFile};
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_ellipsoid-lab");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("ELLIPSOID_LAB_TOL").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn close(v: &Value, want: f64, tol: f64) -> bool {
    (v.as_f64().unwrap() - want).abs() <= tol
}

#[test]
fn state_report_for_obese_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("obese.json");
    std::fs::write(&path, states::write_state(&states::max_obese(0.4).unwrap())).unwrap();

    let out = run(&["state", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let r = &v["report"];
    assert!(close(&r["beta"], 2.0 * 1.2f64.sqrt(), 1e-12));
    assert!(close(&r["fef"], (1.0 + 0.6f64.sqrt()).powi(2) / 4.0, 1e-12));
    assert!(close(&r["fidelity"], 0.8581989, 1e-7));
    assert!(close(&r["concurrence"], 0.6f64.sqrt(), 1e-12));
    assert!(close(&r["negativity"], 0.6, 1e-12));
    assert_eq!(r["sym_extendible"], Value::Bool(false));
    assert!(close(&r["c_norm"], 0.4, 1e-12));
    let e = &v["ellipsoid"];
    assert!(close(&e["center"][2], 0.4, 1e-12));
    assert!(close(&e["semiaxes"][2], 0.6, 1e-12));
    assert_eq!(e["chirality"], Value::from(-1));
}

#[test]
fn state_report_for_maximally_mixed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mixed.json");
    std::fs::write(&path, states::write_state(&states::maximally_mixed())).unwrap();
    let v = json(&run(&["state", path.to_str().unwrap()]));
    assert!(close(&v["report"]["beta"], 0.0, 1e-15));
    assert!(close(&v["report"]["fef"], 0.25, 1e-15));
    for k in 0..3 {
        assert!(close(&v["ellipsoid"]["center"][k], 0.0, 1e-15));
        assert!(close(&v["ellipsoid"]["semiaxes"][k], 0.0, 1e-7));
    }
}

#[test]
fn state_with_pure_bob_marginal_reports_note() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("up.json");
    let up = ellipsoid_lab::Vec3::new(0.0, 0.0, 1.0);
    std::fs::write(&path, states::write_state(&states::product_state(&up, &up).unwrap())).unwrap();
    let out = run(&["state", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["ellipsoid"].is_null());
    assert!(v["report"]["c_norm"].is_null());
    assert!(v["note"].as_str().unwrap().contains("singular"));
}

#[test]
fn invalid_state_files_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let twice = dir.path().join("twice.json");
    let m = states::maximally_mixed().matrix() * ellipsoid_lab::qmat::c64(2.0, 0.0);
    std::fs::write(&twice, StateFile::from_matrix(&m).to_json()).unwrap();
    let out = run(&["state", twice.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unit trace"));

    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "not json").unwrap();
    assert_eq!(run(&["state", garbage.to_str().unwrap()]).status.code(), Some(2));

    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["state", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["scan", "--rank", "7"]).status.code(), Some(2));
    assert_eq!(run(&["scan", "--ensemble", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--points", "1"]).status.code(), Some(2));
}

#[test]
fn sweep_rows_at_bell_and_boundary_points() {
    let out = run(&["sweep", "--grid", "101", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&out);
    let rows = rows.as_array().unwrap();
    let first = &rows[0];
    assert!(close(&first["beta"], 2.0 * std::f64::consts::SQRT_2, 1e-12));
    assert!(close(&first["fef"], 1.0, 1e-12));
    assert!(close(&first["concurrence"], 1.0, 1e-12));
    assert!(close(&first["negativity"], 1.0, 1e-12));
    assert_eq!(first["extendible"], Value::Bool(false));
    let mid = &rows[50];
    assert!(close(&mid["c"], 0.5, 0.0));
    assert!(close(&mid["beta"], 2.0, 1e-12));
    assert_eq!(mid["extendible"], Value::Bool(true));
}

#[test]
fn sweep_fails_with_zero_tolerance() {
    let out = run(&["sweep", "--tol", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mismatch"));
}

#[test]
fn scan_of_a_single_pure_state() {
    let out = run(&["scan", "--samples", "1", "--ensemble", "pure", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row[1], 1.0);
    assert!(row[3] <= 2.0 * std::f64::consts::SQRT_2 + 1e-12);
    assert!(row[3] <= row[5] + 1e-9 && row[4] <= row[6] + 1e-9);
}

#[test]
fn scan_json_format() {
    let out = run(&["scan", "--samples", "50", "--format", "json", "--ensemble", "canonical-filtered"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["records"].as_array().unwrap().len(), 50);
    assert!(v["violations"].as_array().unwrap().is_empty());
    // canonical pure draws are maximally entangled and sit on the bound
    assert!(v["max_beta_gap"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn scan_violations_are_serialised() {
    // A negative tolerance turns every record into a violation.
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("scan.csv");
    let out = run(&["scan", "--samples", "3", "--tol=-1", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let cx = std::fs::read_to_string(dir.path().join("scan.csv.counterexamples.json")).unwrap();
    let v: Value = serde_json::from_str(&cx).unwrap();
    let items = v.as_array().unwrap();
    assert_eq!(items.len(), 3);
    let state: StateFile = serde_json::from_value(items[0]["state"].clone()).unwrap();
    assert!(states::validate(&state.to_matrix().unwrap()).is_ok());
}

#[test]
fn verify_small_run_passes() {
    let out = run(&["verify", "--samples", "300", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["passed"], Value::Bool(true));
    let suites = v["suites"].as_array().unwrap();
    assert!(suites.len() >= 15);
    let nonfatal: Vec<_> = suites.iter().filter(|s| s["fatal"] == Value::Bool(false)).collect();
    assert_eq!(nonfatal.len(), 1);
    assert_eq!(nonfatal[0]["name"], "bounds.negativity_minor_axis");
}

#[test]
fn verify_with_no_samples_is_vacuous() {
    let out = run(&["verify", "--samples", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let v = json(&out);
    for s in v["suites"].as_array().unwrap() {
        assert_eq!(s["passed"], Value::Bool(true));
    }
}

#[test]
fn verify_with_zero_tolerance_fails() {
    let out = run(&["verify", "--samples", "50", "--tol", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["passed"], Value::Bool(false));
    let failed = v["suites"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|s| s["passed"] == Value::Bool(false))
        .count();
    assert!(failed > 0);
}

#[test]
fn tolerance_from_environment() {
    let out = Command::new(BIN)
        .args(["sweep"])
        .env("ELLIPSOID_LAB_TOL", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = Command::new(BIN)
        .args(["sweep", "--tol", "1e-9"])
        .env("ELLIPSOID_LAB_TOL", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}
