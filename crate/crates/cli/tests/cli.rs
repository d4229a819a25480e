use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn polycount(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polycount")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let out = polycount(&full);
    assert!(out.status.success(), "{}", stderr(&out));
    path
}

fn simplex(dir: &Path, n: &str, r: &str) -> PathBuf {
    gen(dir, &format!("simplex{n}_{r}.json"), &["simplex", "--n", n, "--r", r])
}

fn benchmark(dir: &Path) -> PathBuf {
    gen(
        dir,
        "benchmark4x4.json",
        &["transport", "--rows", "108,286,71,127", "--cols", "220,215,93,64"],
    )
}

#[test]
fn gen_writes_loadable_specs() {
    let dir = TempDir::new().unwrap();
    let path = benchmark(dir.path());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["A"].as_array().unwrap().len(), 7);
    assert_eq!(doc["A"][0].as_array().unwrap().len(), 16);
    let out = polycount(&["gen", "simplex", "--n", "1000", "--r", "10"]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["b"][0], 10);
}

#[test]
fn gen_rejects_mismatched_margins() {
    let out = polycount(&["gen", "transport", "--rows", "1,2", "--cols", "2,2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("row sums total 3 but column sums total 4"));
}

#[test]
fn bounds_thm2_with_fixed_gamma() {
    let dir = TempDir::new().unwrap();
    let spec = simplex(dir.path(), "1000", "10");
    let out = polycount(&["bounds", "--spec", spec.to_str().unwrap(), "--method", "thm2", "--gamma", "0.172"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc = stdout_json(&out);
    let b = &doc["bounds"][0];
    assert_eq!(b["method"], "thm2");
    let ln = b["ln_bound"].as_f64().unwrap();
    assert!((ln - 3.14e23f64.ln()).abs() <= 0.01, "{ln}");
    assert_eq!(b["params"]["gamma"], 0.172);
}

#[test]
fn bounds_thm1_on_benchmark() {
    let dir = TempDir::new().unwrap();
    let spec = benchmark(dir.path());
    let out = polycount(&["bounds", "--spec", spec.to_str().unwrap(), "--method", "thm1"]);
    assert!(out.status.success());
    let doc = stdout_json(&out);
    let ln = doc["bounds"][0]["ln_bound"].as_f64().unwrap();
    assert!((ln - 7.14e18f64.ln()).abs() <= 0.01);
    assert_eq!(doc["bounds"][0]["bound_sci"], "7.144e+18");
    assert!((doc["solution"]["entropy"].as_f64().unwrap() - 70.1635).abs() < 1e-3);
}

#[test]
fn thm3_on_benchmark_is_an_error_note() {
    let dir = TempDir::new().unwrap();
    let spec = benchmark(dir.path());
    let out = polycount(&["bounds", "--spec", spec.to_str().unwrap(), "--method", "thm3"]);
    assert_ne!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["bounds"][0]["method"], "thm3");
    assert!(doc["bounds"][0]["error"].as_str().unwrap().contains("not cyclic"));
}

#[test]
fn all_methods_on_a_cyclic_simplex() {
    let dir = TempDir::new().unwrap();
    let spec = simplex(dir.path(), "10", "20");
    let out = polycount(&["bounds", "--spec", spec.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc = stdout_json(&out);
    let methods: Vec<&str> = doc["bounds"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["method"].as_str().unwrap())
        .collect();
    assert_eq!(methods, ["thm1", "cor1", "thm2", "thm3_rigorous", "thm3_asymptotic"]);
    // C(29, 20) = 10015005
    for b in doc["bounds"].as_array().unwrap() {
        assert!(b["ln_bound"].as_f64().unwrap() >= 10015005f64.ln());
    }
}

#[test]
fn count_and_mc_on_small_simplex() {
    let dir = TempDir::new().unwrap();
    let spec = simplex(dir.path(), "4", "2");
    let spec = spec.to_str().unwrap();
    let out = polycount(&["count", "--spec", spec]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["exact"]["count"], "10");

    let out = polycount(&["mc", "--spec", spec, "--trials", "1000000", "--seed", "42"]);
    assert!(out.status.success());
    let mc = &stdout_json(&out)["mc"];
    assert_eq!(mc["seed"], 42);
    assert_eq!(mc["trials"], 1_000_000);
    let est = mc["ln_estimate"].as_f64().unwrap().exp();
    let se = est * mc["ln_stderr"].as_f64().unwrap();
    assert!((est - 10.0).abs() <= 4.0 * se);
}

#[test]
fn reports_are_reproducible_apart_from_timings() {
    let dir = TempDir::new().unwrap();
    let spec = simplex(dir.path(), "5", "3");
    let spec = spec.to_str().unwrap();
    let strip = |out: Output| {
        let mut v = stdout_json(&out);
        v.as_object_mut().unwrap().remove("timings_ms");
        serde_json::to_string(&v).unwrap()
    };
    for args in [
        vec!["mc", "--spec", spec, "--trials", "200000", "--seed", "7"],
        vec!["bounds", "--spec", spec],
        vec!["count", "--spec", spec],
    ] {
        assert_eq!(strip(polycount(&args)), strip(polycount(&args)), "{args:?}");
    }
}

#[test]
fn out_flag_writes_the_report() {
    let dir = TempDir::new().unwrap();
    let spec = simplex(dir.path(), "4", "2");
    let report = dir.path().join("report.json");
    let out = polycount(&["solve", "--spec", spec.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(doc["solution"]["z"].as_array().unwrap().len(), 4);
}

#[test]
fn error_exit_codes() {
    let dir = TempDir::new().unwrap();
    let mixed = dir.path().join("mixed_sign.json");
    std::fs::write(&mixed, r#"{"name": "mixed", "A": [[1, -1, 1]], "b": [2]}"#).unwrap();
    let out = polycount(&["count", "--spec", mixed.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("nonnegative A required"));

    let out = polycount(&["count", "--spec", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let spec = simplex(dir.path(), "4", "2");
    let out = polycount(&["bounds", "--spec", spec.to_str().unwrap(), "--gamma", "-1"]);
    assert_eq!(out.status.code(), Some(2));

    let fractional = dir.path().join("fractional.json");
    std::fs::write(&fractional, r#"{"A": [[1, 1, 1]], "b": ["5/2"]}"#).unwrap();
    let out = polycount(&["mc", "--spec", fractional.to_str().unwrap(), "--trials", "10"]);
    assert_eq!(out.status.code(), Some(4));
}
