//! End-to-end runs of the `hyperkin` binary.

use std::process::{Command, Output};

fn hyperkin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperkin")).args(args).env("NO_COLOR", "1").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn list_shows_the_catalog() {
    let o = hyperkin(&["list"]);
    assert!(o.status.success());
    let out = stdout(&o);
    for name in ["balloon", "cylinder-unroll", "hyperbolic-circle", "conformal-ambient"] {
        assert!(out.contains(name), "{out}");
    }
}

#[test]
fn analyze_writes_a_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("balloon.json");
    let o = hyperkin(&["analyze", "--scenario", "balloon", "--grid", "5", "--out", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["schema"], "hyperkin-report/1");
    assert_eq!(v["verdict"]["affine"], true);
    assert_eq!(v["aggregates"]["points_total"], 25);
}

#[test]
fn analyze_csv_summary_to_stdout() {
    let o = hyperkin(&["analyze", "--scenario", "rigid-translation", "--grid", "3", "--format", "csv-summary"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.lines().next().unwrap().starts_with("point,"));
    assert_eq!(out.lines().count(), 10);
}

#[test]
fn analyze_is_deterministic() {
    let args = ["analyze", "--scenario", "sphere-killing-rotation", "--grid", "4"];
    assert_eq!(hyperkin(&args).stdout, hyperkin(&args).stdout);
}

#[test]
fn verify_passes_and_fails_on_tolerance() {
    let o = hyperkin(&["verify", "--scenario", "cylinder-unroll", "--grid", "5", "--fd-validate"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert!(!stdout(&o).contains("FAIL"));
    let o = hyperkin(&["verify", "--scenario", "balloon", "--grid", "5", "--tol-route", "1e-300"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn classify_prints_the_verdict() {
    let o = hyperkin(&["classify", "--scenario", "cylinder-unroll", "--grid", "5"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("affine=true"), "{}", stdout(&o));
    let o = hyperkin(&["classify", "--scenario", "parallel-ellipsoid", "--grid", "5"]);
    assert!(stdout(&o).contains("affine=false"), "{}", stdout(&o));
}

#[test]
fn check_expr_canonicalizes_and_rejects() {
    let o = hyperkin(&["check-expr", "t * sin(2*v)"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "t*sin(2*v)");
    let o = hyperkin(&["check-expr", "t*sin(2*v"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).to_lowercase().contains("unbalanced"), "{}", stderr(&o));
    let o = hyperkin(&["check-expr", "w", "--vars", "u,v"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_and_runtime_errors() {
    assert_eq!(hyperkin(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(hyperkin(&["classify", "--scenario", "balloon", "--tol-affine", "-1"]).status.code(), Some(2));
    let o = hyperkin(&["classify", "--scenario", "no-such"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no-such"));
    let o = hyperkin(&["classify", "--file", "/nonexistent/x.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent/x.toml"));
}
