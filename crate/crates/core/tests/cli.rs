use std::process::{Command, Output};

use serde_json::Value;

fn ctxfer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctxfer"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> (Value, i32) {
    let out = ctxfer(args);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    });
    (v, out.status.code().unwrap())
}

fn f(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

#[test]
fn build_reports_reflectivities_and_envelope() {
    let (v, code) = json(&["build", "--r1", "0.5", "--r2", "0.5"]);
    assert_eq!(code, 0);
    assert_eq!(v["schema"], "ctxfer/1");
    assert_eq!(v["command"], "build");
    let c = &v["data"]["config"];
    assert_eq!(f(&c["rf"]), 0.25);
    assert!((f(&c["rs1"]) - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(v["data"]["paths"].as_array().unwrap().len(), 10);
}

#[test]
fn build_symmetric_has_equal_reflectivities() {
    let (v, code) = json(&["build", "--symmetric"]);
    assert_eq!(code, 0);
    let c = &v["data"]["config"];
    let r = f(&c["r1"]);
    for key in ["r2", "rf", "rs1", "rs2"] {
        assert!((f(&c[key]) - r).abs() < 1e-12, "{key}");
    }
}

#[test]
fn degenerate_reflectivity_is_a_usage_error() {
    let out = ctxfer(&["build", "--r1", "1.0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("r1"));

    assert_eq!(ctxfer(&["build", "--r2", "-0.1"]).status.code(), Some(2));
    assert_eq!(ctxfer(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn check_flags_the_paradox_state() {
    let (v, code) = json(&["check"]);
    assert_eq!(code, 3);
    let d = &v["data"];
    assert!((f(&d["margin"]) + 1.0 / 9.0).abs() < 1e-12);
    assert_eq!(d["violated"], true);

    let (v, code) = json(&["check", "--state", "0,0,1"]);
    assert_eq!(code, 0);
    assert!((f(&v["data"]["margin"]) - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(v["data"]["violated"], false);
}

#[test]
fn weak_on_port_state_marks_undefined_rows() {
    let out = ctxfer(&["weak", "--state", "1,0,0", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "path,outcome,value_re,value_im,kd_re,kd_im");
    assert!(lines.next().unwrap().starts_with("1,1,1,0,"));
    assert!(text.contains("undefined"));

    let strict = ctxfer(&["weak", "--state", "1,0,0", "--strict"]);
    assert_eq!(strict.status.code(), Some(4));
}

#[test]
fn probs_for_port_state() {
    let (v, code) = json(&["probs", "--state", "1,0,0"]);
    assert_eq!(code, 0);
    let rows = v["data"]["probabilities"].as_array().unwrap();
    let p = |label: &str| {
        f(&rows.iter().find(|r| r["path"] == label).unwrap()["probability"])
    };
    assert_eq!(p("1"), 1.0);
    assert!(p("2").abs() < 1e-15 && p("3").abs() < 1e-15);
    let total: f64 = ["f", "S1", "P1"].iter().map(|l| p(l)).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn scan_csv_peaks_at_balanced_point() {
    let out = ctxfer(&["scan", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let mut best = (0.0, 0.0, f64::MIN);
    let mut rows = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        let x: Vec<f64> = rec.iter().map(|s| s.parse().unwrap()).collect();
        if x[2] > best.2 {
            best = (x[0], x[1], x[2]);
        }
        assert!(x[4] <= 1e-12);
        rows += 1;
    }
    assert_eq!(rows, 21 * 21);
    assert!((best.0 - 0.5).abs() < 1e-12 && (best.1 - 0.5).abs() < 1e-12);
    assert!((best.2 - 1.0 / 9.0).abs() < 1e-11);
}

#[test]
fn sample_is_reproducible_per_seed() {
    let args = ["sample", "--context", "f,S1,P1", "--shots", "5000", "--seed", "11"];
    let (a, code) = json(&args);
    assert_eq!(code, 0);
    let (b, _) = json(&args);
    assert_eq!(a, b);
    let total: u64 = a["data"]["counts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["count"].as_u64().unwrap())
        .sum();
    assert_eq!(total, 5000);

    let bad = ctxfer(&["sample", "--context", "1,2,S1"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn probe_recovers_negative_current() {
    let (v, code) = json(&["probe", "--path", "P2", "--outcome", "1"]);
    assert_eq!(code, 0);
    let x = &v["data"]["extrapolated"];
    assert!((f(&x["re"]) + 1.0 / 3.0).abs() < 1e-4);
    assert!(f(&x["im"]).abs() < 1e-12);

    let out = ctxfer(&["probe", "--state", "1,0,0", "--path", "f", "--outcome", "2"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn out_file_and_density_input() {
    let dir = tempfile::tempdir().unwrap();
    let rho = dir.path().join("rho.json");
    let third = serde_json::json!({"re": 1.0 / 3.0, "im": 0.0});
    let zero = serde_json::json!({"re": 0.0, "im": 0.0});
    let doc = serde_json::json!({
        "density": [[third, zero, zero], [zero, third, zero], [zero, zero, third]]
    });
    std::fs::write(&rho, doc.to_string()).unwrap();

    let dest = dir.path().join("check.json");
    let state = format!("@{}", rho.display());
    let out = ctxfer(&["check", "--state", &state, "--out", dest.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&dest).unwrap()).unwrap();
    assert!((f(&v["data"]["margin"]) - 1.0 / 3.0).abs() < 1e-12);
}
