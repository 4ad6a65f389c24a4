use std::path::Path;
use std::process::{Command, Output};

fn padwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_padwave"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf8")
}

fn write_function(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, json).expect("write fixture");
    path.to_string_lossy().into_owned()
}

#[test]
fn classify_unit_translation() {
    let out = padwave(&["classify", "--p", "2", "--a", "1", "--b", "1"]);
    assert!(out.status.success());
    assert_eq!(
        stdout(&out).trim(),
        r#"{"gamma":0,"n":"0","j":1,"phase_num":1,"phase_den":2}"#
    );
}

#[test]
fn classify_dilated_translated() {
    let out = padwave(&["classify", "--p", "3", "--a", "18", "--b", "1/3"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["gamma"], -2);
    assert_eq!(v["n"], "1/27");
    assert_eq!(v["j"], 2);
    assert_eq!(v["phase_num"], 0);
    assert_eq!(v["phase_den"], 1);
}

#[test]
fn classify_rejects_zero_dilation() {
    let out = padwave(&["classify", "--p", "2", "--a", "0", "--b", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty(), "no partial output on exit 2");
    assert!(!out.stderr.is_empty());
}

#[test]
fn config_errors_exit_two() {
    let out = padwave(&["classify", "--p", "6", "--a", "1", "--b", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = padwave(&[
        "classify",
        "--p",
        "2",
        "--precision",
        "4",
        "--a",
        "1",
        "--b",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = padwave(&["verify", "--suite", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn wavelet_evaluation() {
    let out = padwave(&[
        "wavelet", "--p", "2", "--gamma", "0", "--j", "1", "--at", "0", "--at", "1", "--at", "1/2",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let values = v["values"].as_array().unwrap();
    assert_eq!(values[0]["value"][0], 1.0);
    assert_eq!(values[1]["value"][0], -1.0);
    assert_eq!(values[2]["value"][0], 0.0);

    // the affine form at (1,1) flips the sign
    let out = padwave(&["wavelet", "--p", "2", "--a", "1", "--b", "1", "--at", "0"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["values"][0]["value"][0], -1.0);
}

#[test]
fn coeffs_of_the_unit_ball_indicator() {
    let dir = tempfile::tempdir().unwrap();
    let omega = r#"{ "p": 2, "scale": 0, "cells": [ { "center": "0", "value": [1.0, 0.0] } ] }"#;
    let input = write_function(dir.path(), "omega.json", omega);
    let csv_path = dir.path().join("coeffs.csv");
    let out = padwave(&[
        "coeffs",
        "--p",
        "2",
        "--format",
        "csv",
        "--input",
        &input,
        "--gamma-min",
        "1",
        "--gamma-max",
        "8",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "gamma,n_literal,j,coeff_re,coeff_im");
    let first = lines.next().unwrap();
    assert!(first.starts_with("1,0,1,"), "{first}");
    let coeff: f64 = first.split(',').nth(3).unwrap().parse().unwrap();
    assert!((coeff - 0.5f64.sqrt()).abs() < 1e-13);
    assert_eq!(csv.lines().count(), 9);

    let summary_path = format!("{}.summary.json", csv_path.display());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(summary_path).unwrap()).unwrap();
    assert_eq!(summary["norm_sq"], 1.0);
    let energy = summary["windowed_energy"].as_f64().unwrap();
    assert!((energy - (1.0 - 2.0f64.powi(-8))).abs() < 1e-12);
    let residual = summary["residual_norm_sq"].as_f64().unwrap();
    assert!((residual - 2.0f64.powi(-8)).abs() < 1e-12);
    assert_eq!(summary["covered"], true);
}

#[test]
fn coeffs_of_empty_function() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_function(
        dir.path(),
        "empty.json",
        r#"{ "p": 3, "scale": 0, "cells": [] }"#,
    );
    let out = padwave(&[
        "coeffs",
        "--p",
        "3",
        "--format",
        "csv",
        "--input",
        &input,
        "--gamma-min",
        "0",
        "--gamma-max",
        "4",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 1, "header only");
}

#[test]
fn malformed_function_files_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let overlapping = write_function(
        dir.path(),
        "dup.json",
        r#"{ "p": 2, "scale": 0, "cells": [
            {"center": "5/4", "value": [1.0, 0.0]},
            {"center": "1/4", "value": [1.0, 0.0]} ] }"#,
    );
    let out = padwave(&[
        "coeffs",
        "--input",
        &overlapping,
        "--gamma-min",
        "0",
        "--gamma-max",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("overlapping"));
}

#[test]
fn spectrum_reports_eigenvalues() {
    let out = padwave(&[
        "spectrum",
        "--p",
        "3",
        "--alpha",
        "1",
        "--gamma-min",
        "-1",
        "--gamma-max",
        "1",
        "--cosets",
        "2",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["p"], 3);
    for case in v["cases"].as_array().unwrap() {
        let gamma = case["gamma"].as_i64().unwrap();
        let want = 3.0f64.powi(1 - gamma as i32);
        assert_eq!(case["eigenvalue"].as_f64().unwrap(), want);
        assert!(case["max_rel_err"].as_f64().unwrap() < 1e-10);
    }
}

#[test]
fn monna_outputs() {
    let out = padwave(&["monna", "--p", "2", "--x", "3", "--format", "csv"]);
    assert_eq!(stdout(&out).trim(), "3/4");
    let out = padwave(&["monna", "--p", "2", "--ball", "1/2,0", "--format", "csv"]);
    assert_eq!(stdout(&out).trim(), "[1, 2)");
    let out = padwave(&["monna", "--p", "3", "--ball", "0,1"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["left"], "0");
    assert_eq!(v["right"], "1/3");
    // infinite expansions are rejected, not rounded
    let out = padwave(&["monna", "--p", "2", "--x", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn project_collapses_the_wavelet() {
    let dir = tempfile::tempdir().unwrap();
    let psi = r#"{ "p": 2, "scale": 1, "cells": [
        { "center": "0", "value": [1.0, 0.0] },
        { "center": "1", "value": [-1.0, 0.0] } ] }"#;
    let input = write_function(dir.path(), "psi.json", psi);
    let out = padwave(&["project", "--p", "2", "--input", &input, "--gamma", "0"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["cells"].as_array().unwrap().len(), 0);
    let out = padwave(&["project", "--p", "2", "--input", &input, "--gamma", "-1"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["cells"].as_array().unwrap().len(), 2);
}

#[test]
fn verify_admissibility_passes() {
    let out = padwave(&["verify", "--suite", "admissibility", "--p", "5"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v[0]["passed"], true);
}

#[test]
fn verify_lemma_suite_passes() {
    let out = padwave(&["verify", "--suite", "lemma", "--p", "2", "--seed", "7"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let soundness = &v[0]["checks"][0];
    assert_eq!(soundness["name"], "classification-soundness");
    assert_eq!(soundness["cases"], 1000);
    assert!(soundness["max_error"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn verify_monna_is_deterministic() {
    let a = padwave(&["verify", "--suite", "monna", "--p", "2", "--seed", "7"]);
    let b = padwave(&["verify", "--suite", "monna", "--p", "2", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "same seed, byte-identical report");
    let c = padwave(&[
        "verify", "--suite", "monna", "--p", "2", "--seed", "8", "--format", "csv",
    ]);
    assert!(c.status.success());
    assert!(stdout(&c).starts_with("suite,check,cases,max_error,tolerance,passed"));
}
