use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hodge-wp"))
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str], model: &Path) -> Output {
    bin().arg(args[0]).arg(model).args(&args[1..]).output().unwrap()
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success() || out.status.code() == Some(3),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

const CY3_A2: &str = r#"{"schema_version": 1, "kind": "cy3",
  "payload": {"n_moduli": 1, "yukawa": [{"index": [0, 0, 0], "value": 2}]}}"#;
const HK1: &str = r#"{"schema_version": 1, "kind": "hyperkahler", "payload": {"n_moduli": 1, "half_dim": 2}}"#;
const HK2: &str = r#"{"schema_version": 1, "kind": "hyperkahler", "payload": {"n_moduli": 2, "half_dim": 2}}"#;
const WEAK: &str = r#"{"schema_version": 1, "kind": "cy3",
  "payload": {"n_moduli": 1, "yukawa": [{"index": [0, 0, 0], "value": 1}],
              "extra_coeffs": [{"index": [3], "vector": [0, 0, [1, 2], 0]}]}}"#;

#[test]
fn sigma_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "cy3.json", CY3_A2);
    let r = json_of(&run(&["sigma", "--at", "1/2", "--format", "json", "--strict"], &m));
    let expect = json!([
        [1, [1, 2], [1, 4], [1, 24]],
        [0, 1, 1, [1, 4]],
        [0, 0, 1, [1, 2]],
        [0, 0, 0, 1]
    ]);
    assert_eq!(r["tables"]["sigma"], expect);
    for v in ["preserves_q", "is_exponential", "transversal", "abelian"] {
        assert_eq!(r["verdicts"][v], json!(true), "{v}");
    }
    assert_eq!(r["residuals"]["preserves_q"], json!(0.0));
}

#[test]
fn hyperkahler_curvature_at_base() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "hk.json", HK1);
    let r = json_of(&run(&["curvature", "--format", "json"], &m));
    assert_eq!(r["tables"]["curvature"]["nonzero"]["0,0,0,0"], json!(1));
    assert!(r["residuals"]["curvature_closed_form"].as_f64().unwrap() < 1e-10);
    assert!(r["residuals"]["curvature"].as_f64().unwrap() < 1e-6);
    assert!(!r["conventions"].as_array().unwrap().is_empty());
    assert_eq!(r["passed"], json!(true));
}

#[test]
fn weak_correction_is_not_symmetric() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "weak.json", WEAK);
    let out = run(&["check-symmetric", "--format", "json", "--strict"], &m);
    assert_eq!(out.status.code(), Some(3));
    let r = json_of(&out);
    assert_eq!(r["verdicts"]["symmetry"], json!("not_symmetric"));
    assert!(r["residuals"]["base_max_nabla_fd"].as_f64().unwrap() > 1e-6);
    // without --strict a failing verdict still exits 0
    assert!(run(&["check-symmetric"], &m).status.success());
}

#[test]
fn hyperkahler_is_symmetric_on_samples() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "hk2.json", HK2);
    let r = json_of(&run(&["check-symmetric", "--points", "5", "--seed", "3", "--format", "json", "--strict"], &m));
    assert_eq!(r["verdicts"]["symmetry"], json!("symmetric_on_samples"));
    assert_eq!(r["tables"]["samples"].as_array().unwrap().len(), 5);
}

#[test]
fn reports_round_trip_bit_identically() {
    let dir = tempfile::tempdir().unwrap();
    let first = write(dir.path(), "a.json", CY3_A2);
    for args in [
        vec!["sigma", "--at", "1/3", "--format", "json"],
        vec!["yukawa", "--format", "json"],
        vec!["curvature", "--format", "json"],
    ] {
        let a = run(&args, &first);
        let r = json_of(&a);
        let reloaded = write(dir.path(), "b.json", &serde_json::to_string(&r["model"]).unwrap());
        let b = run(&args, &reloaded);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn command_and_model_mismatch_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "hk.json", HK1);
    let out = run(&["yukawa"], &m);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("weight-3"));
    let c = write(dir.path(), "cy3.json", CY3_A2);
    assert_eq!(run(&["hk-domain"], &c).status.code(), Some(2));
}

#[test]
fn bad_files_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let v2 = write(dir.path(), "v2.json", r#"{"schema_version": 2, "kind": "cy3", "payload": {}}"#);
    let out = run(&["sigma"], &v2);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema_version 2"));

    let asym = write(
        dir.path(),
        "asym.json",
        r#"{"schema_version": 1, "kind": "cy3", "payload": {"n_moduli": 2, "yukawa": [
            {"index": [0, 1, 1], "value": 1}, {"index": [1, 0, 1], "value": 3}]}}"#,
    );
    let out = run(&["sigma"], &asym);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("(1, 0, 1)"));

    let broken = write(dir.path(), "broken.json", "{\n\"schema_version\": 1,\n\"kind\": \n}");
    let out = run(&["sigma"], &broken);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));
}

#[test]
fn hyperkahler_domain_and_coincidence() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "hk.json", HK1);
    let r = json_of(&run(&["hk-domain", "--at", "0.99", "--format", "json"], &m));
    assert_eq!(r["verdicts"]["at"], json!("inside"));
    let p = r["residuals"]["positivity_at"].as_f64().unwrap();
    assert!((p - 0.2600490025).abs() < 1e-12);

    let out = run(&["hk-domain", "--at", "2", "--strict"], &m);
    assert_eq!(out.status.code(), Some(3));

    let r = json_of(&run(&["hk-coincidence", "--at", "3/10", "--points", "4", "--format", "json", "--strict"], &m));
    assert_eq!(r["verdicts"]["coincide"], json!(true));
    assert_eq!(r["tables"]["points"][0]["orbit_row"], json!([1, [3, 10], [9, 200]]));
}

#[test]
fn every_command_produces_a_text_report() {
    let dir = tempfile::tempdir().unwrap();
    let cy3 = write(dir.path(), "cy3.json", CY3_A2);
    let hk = write(dir.path(), "hk.json", HK2);
    let cases: [(&str, &Path); 12] = [
        ("check-hodge-riemann", &cy3),
        ("expand-family", &hk),
        ("quantum-correction", &cy3),
        ("yukawa", &cy3),
        ("wp-metric", &hk),
        ("curvature", &cy3),
        ("nabla-r", &hk),
        ("check-symmetric", &cy3),
        ("sigma", &cy3),
        ("abelian-check", &hk),
        ("hk-domain", &hk),
        ("hk-coincidence", &hk),
    ];
    for (cmd, model) in cases {
        let out = run(&[cmd, "--strict"], model);
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.starts_with(&format!("command: {cmd}\n")), "{text}");
        assert!(text.contains("residuals:"), "{cmd} has no residuals:\n{text}");
    }
}
