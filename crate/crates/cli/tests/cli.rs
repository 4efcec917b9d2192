use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn zladder(cache_dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zladder"))
        .env("ZETA_LADDER_CACHE_DIR", cache_dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn knots(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && *l != "t,a")
        .map(str::to_owned)
        .collect()
}

#[test]
fn displayed_special_case_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let out = zladder(
        dir.path(),
        &["verify", "secondary1", "--delta3", "1/3", "--delta4", "1/5", "--L", "200", "--U", "1.0", "--k1", "1", "--k2", "2"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(r["formula_id"], "SECONDARY1_44");
    assert!((r["rhs"].as_f64().unwrap() - 1.024_577_961_894_555).abs() < 1e-12);
    assert!(r["rel_residual"].as_f64().unwrap() <= r["tolerance"].as_f64().unwrap());
    assert_eq!(r["passed"], true);
    for field in ["error_budget", "points", "timings", "condition"] {
        assert!(r.get(field).is_some(), "missing {field}");
    }
}

#[test]
fn equal_deltas_are_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = zladder(
        dir.path(),
        &["verify", "secondary1", "--delta3", "1/2", "--delta4", "1/2", "--L", "200", "--U", "1.0"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_formula_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(zladder(dir.path(), &["verify", "quaternary", "--L", "200", "--U", "1.0"]).status.code(), Some(2));
    assert_eq!(zladder(dir.path(), &["verify", "echf1", "--L", "200"]).status.code(), Some(2));
    assert_eq!(zladder(dir.path(), &["verify", "echf2", "--L", "200", "--U", "1.0"]).status.code(), Some(2));
}

#[test]
fn inadmissible_parameters_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(zladder(dir.path(), &["verify", "echf1", "--L", "50", "--U", "1.0"]).status.code(), Some(2));
    assert_eq!(zladder(dir.path(), &["verify", "echf1", "--L", "200", "--U", "2.0"]).status.code(), Some(2));
    assert_eq!(zladder(dir.path(), &["--k0", "0", "verify", "echf1", "--L", "200", "--U", "1.0"]).status.code(), Some(2));
}

#[test]
fn fixed_seed_scan_repeats_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--seed", "7", "scan", "invariance", "--samples", "4", "--l-max", "400"];
    let a = zladder(dir.path(), &args);
    let b = zladder(dir.path(), &args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let (ja, jb) = (json(&a), json(&b));
    assert_eq!(ja["samples"], jb["samples"]);
    assert_eq!(ja["mean"], jb["mean"]);
    assert_eq!(ja["samples"].as_array().unwrap().len(), 4);
}

#[test]
fn single_sample_has_zero_spread() {
    let dir = tempfile::tempdir().unwrap();
    let out = zladder(dir.path(), &["scan", "invariance", "--samples", "1", "--l-max", "300"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["stddev"].as_f64(), Some(0.0));
}

#[test]
fn gap_scan_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = zladder(dir.path(), &["--format", "csv", "scan", "gaps", "--L", "300,500", "--r-max", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("L,U,r,rho,predicted,ratio,li_predicted,li_ratio"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn asymptotic_scan_is_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let out = zladder(dir.path(), &["scan", "asymptotic", "--L", "150,400"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = json(&out)["rows"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r["exact_rel_residual"].as_f64().unwrap() < 1e-6));
}

#[test]
fn cache_rebuild_is_idempotent_and_extends() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ladder-table.csv");
    assert_eq!(zladder(dir.path(), &["ladder-build", "--tmax", "400"]).status.code(), Some(0));
    let first = std::fs::read(&path).unwrap();
    assert_eq!(zladder(dir.path(), &["ladder-build", "--tmax", "400"]).status.code(), Some(0));
    assert_eq!(std::fs::read(&path).unwrap(), first);

    let before = knots(&path);
    assert_eq!(zladder(dir.path(), &["ladder-build", "--tmax", "900"]).status.code(), Some(0));
    let after = knots(&path);
    assert!(after.len() > before.len());
    assert_eq!(&after[..before.len()], &before[..]);
}

#[test]
fn cache_from_another_configuration_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(zladder(dir.path(), &["ladder-build", "--tmax", "300"]).status.code(), Some(0));
    let out = zladder(dir.path(), &["--quad-tol", "1e-11", "ladder-build", "--tmax", "300"]);
    assert_eq!(out.status.code(), Some(2));
    let out = zladder(dir.path(), &["--quad-tol", "1e-11", "verify", "echf1", "--L", "200", "--U", "1.0"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(zladder(dir.path(), &["ladder-build", "--tmax", "2e6"]).status.code(), Some(2));
}

#[test]
fn cached_and_fresh_runs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["verify", "echf2", "--delta3", "1/2", "--delta4", "1", "--L", "180", "--U", "0.8"];
    let fresh = json(&zladder(dir.path(), &args));
    assert_eq!(zladder(dir.path(), &["ladder-build", "--tmax", "1000"]).status.code(), Some(0));
    let cached = json(&zladder(dir.path(), &args));
    assert_eq!(fresh["lhs"], cached["lhs"]);
}
