use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bowditch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bowditch")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = bowditch(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn classify_sink_example() {
    let v = json(&["classify", "--x", "1", "--y", "1", "--z", "3"]);
    assert_eq!(v["schema"], "v1");
    assert_eq!(v["variant"], "GeneralizedFrickeC11");
    assert_eq!(num(&v["delta"]), 1.0);
    assert_eq!(v["word"], "");
    assert_eq!(v["depth"], 0);
    assert_eq!(v["boundary"]["kind"], "Cone");
}

#[test]
fn classify_exact_prints_fractions() {
    let v = json(&["classify", "--x", "2", "--y", "1", "--z", "3", "--exact"]);
    assert_eq!(v["variant"], "GeneralizedFrickeC11");
    assert_eq!(v["delta"], "1");
    assert_eq!(v["sink"], serde_json::json!({ "x": "1", "y": "1", "z": "3" }));
    assert_eq!(v["word"], "1");
}

#[test]
fn topology_examples() {
    let v = json(&["topology", "--k", "-10"]);
    assert_eq!(v["topology"], "Cylinder");
    assert!(v.get("slopes").is_none());
    let v = json(&["topology", "--k", "8"]);
    assert_eq!(v["topology"], "TwoSheets");
    let m = v["slopes"].as_array().unwrap();
    assert!((num(&m[0]) * num(&m[1]) - 1.0).abs() < 1e-12);
}

#[test]
fn orbit_example() {
    let v = json(&["orbit", "--x", "1", "--y", "1", "--z", "3", "--word", "13", "--exact"]);
    assert_eq!(v["character"], serde_json::json!({ "x": "2", "y": "1", "z": "-5" }));
    assert_eq!(v["kappa"], "8");
    let v = json(&["orbit", "--x", "1", "--y", "1", "--z", "3", "--word", "13"]);
    assert_eq!([num(&v["character"]["x"]), num(&v["character"]["y"]), num(&v["character"]["z"])], [2.0, 1.0, -5.0]);
}

#[test]
fn floats_have_seventeen_significant_digits() {
    let out = bowditch(&["psi", "--a", "1", "--b", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().find(|l| l.contains("\"x\"")).unwrap();
    let mantissa = line.split(':').nth(1).unwrap().trim().trim_end_matches(',').split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17, "{line}");
}

#[test]
fn exact_mode_rejects_irrational_literals() {
    let out = bowditch(&["classify", "--x", "1", "--y", "1", "--z", "sqrt10", "--exact"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--z"));
    // float mode takes it
    let v = json(&["classify", "--x", "1", "--y", "1", "--z", "sqrt10"]);
    assert_eq!(v["variant"], "GeneralizedFrickeC11");
}

#[test]
fn exit_codes() {
    assert_eq!(bowditch(&["classify", "--x", "1", "--y", "1", "--z", "3", "--bogus"]).status.code(), Some(2));
    assert_eq!(bowditch(&["classify", "--x", "one", "--y", "1", "--z", "3"]).status.code(), Some(2));
    assert_eq!(bowditch(&["classify", "--x", "1", "--y", "1"]).status.code(), Some(2));
    assert_eq!(bowditch(&["measure", "--k", "8", "--window", "1:0:0:1"]).status.code(), Some(2));
    assert_eq!(bowditch(&["geodesic", "--x", "1", "--y", "1", "--z", "3", "--slot", "4"]).status.code(), Some(2));
    // the disc around the origin has no preimage at k = -10
    let out = bowditch(&["measure", "--k", "-10", "--window", "-0.5:0.5:-0.5:0.5", "--res", "4"]);
    assert_eq!(out.status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let ppm = dir.path().join("void.ppm");
    let out = bowditch(&["render", "--k", "-10", "--window", "-0.5:0.5:-0.5:0.5", "--res", "4", "--out", ppm.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!ppm.exists());
}

#[test]
fn classify_output_round_trips() {
    let points = [
        ["1.3", "2.9", "2.5"],
        ["0.7", "-1.1", "-3.3"],
        ["3", "3", "-2"],
        ["-2.2", "0.4", "1.9"],
        ["0.5", "0.25", "1"],
    ];
    for p in points {
        let first = json(&["classify", "--x", p[0], "--y", p[1], "--z", p[2]]);
        let c = &first["character"];
        let (x, y, z) = (c["x"].to_string(), c["y"].to_string(), c["z"].to_string());
        let second = json(&["classify", "--x", &x, "--y", &y, "--z", &z]);
        assert_eq!(first, second, "{p:?}");
    }
}

#[test]
fn lift_from_level() {
    let v = json(&["classify", "--x", "1", "--y", "1", "--k", "8", "--sheet", "plus"]);
    assert_eq!(num(&v["character"]["z"]), 3.0);
    assert_eq!(v["variant"], "GeneralizedFrickeC11");
}

#[test]
fn geodesic_csv() {
    let out = bowditch(&["geodesic", "--x", "1", "--y", "1", "--z", "3", "--from", "-3", "--to", "3", "--exact"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "n,trace");
    let traces: Vec<&str> = rows[1..].iter().map(|r| r.split(',').nth(1).unwrap()).collect();
    assert_eq!(traces, ["13", "5", "2", "1", "1", "2", "5"]);
    let param = |name: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(&format!("# {name} "))).unwrap();
        line.rsplit(' ').next().unwrap().parse().unwrap()
    };
    // y_n = a λⁿ + b λ⁻ⁿ with a b = (k + 2 - z²) / (z² - 4) = 1/5
    assert!((param("a") * param("b") - 0.2).abs() < 1e-12);
    assert!((param("lambda") - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
}

#[test]
fn bq_reports() {
    let v = json(&["bq", "--x", "1", "--y", "1", "--z", "3"]);
    assert_eq!(v["satisfied"], true);
    assert_eq!(v["complete"], true);
    let v = json(&["bq", "--x", "1", "--y", "1", "--z", "1", "--exact"]);
    assert_eq!(v["satisfied"], false);
    assert!(v["witness"].is_object());
}

#[test]
fn measure_report() {
    let v = json(&["measure", "--k", "8", "--window", "0.5:1.5:0.5:1.5", "--res", "64"]);
    assert_eq!(v["resolution"], serde_json::json!([64, 64]));
    assert!(num(&v["value"]) > 0.0);
    assert!(num(&v["error_estimate"]) < 1e-3 * num(&v["value"]));
    let none = json(&["measure", "--k", "8", "--window", "0.5:1.5:0.5:1.5", "--res", "16", "--variant", "fricke-c02"]);
    assert_eq!(num(&none["value"]), 0.0);
}

fn render(dir: &Path, name: &str, threads: Option<&str>) -> (Vec<u8>, Vec<u8>, Vec<u8>, Vec<u8>) {
    let ppm = dir.join(format!("{name}.ppm"));
    let csv = dir.join(format!("{name}.csv"));
    let mut args = vec![
        "render", "--k", "8", "--window", "-4:4:-4:4", "--res", "48", "--coloring", "end",
        "--out", ppm.to_str().unwrap(), "--csv", csv.to_str().unwrap(),
    ];
    if let Some(n) = threads {
        args.extend(["--threads", n]);
    }
    let out = bowditch(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let read = |p: &Path| std::fs::read(p).unwrap();
    (read(&ppm), read(&ppm.with_extension("json")), read(&csv), out.stdout)
}

#[test]
fn render_is_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let (ppm1, side1, csv1, _) = render(dir.path(), "a", Some("1"));
    let (ppm4, side4, csv4, _) = render(dir.path(), "b", Some("4"));
    let (ppm, side, csv, _) = render(dir.path(), "c", None);
    assert!(ppm1.starts_with(b"P6\n48 48\n255\n"));
    assert_eq!(ppm1.len(), 13 + 48 * 48 * 3);
    assert_eq!(ppm1, ppm4);
    assert_eq!(ppm1, ppm);
    assert_eq!((&side1, &csv1), (&side4, &csv4));
    assert_eq!((&side1, &csv1), (&side, &csv));
    let sidecar: Value = serde_json::from_slice(&side1).unwrap();
    assert_eq!(sidecar["palette"].as_array().unwrap().len(), 16);
    assert_eq!(sidecar["resolution"], serde_json::json!([48, 48]));
    assert_eq!(String::from_utf8(csv1).unwrap().lines().count(), 1 + 48 * 48);
}

#[test]
fn measure_is_thread_independent() {
    let args = ["measure", "--k", "3", "--res", "32", "--variant", "fricke"];
    let one = bowditch(&[&args[..], &["--threads", "1"]].concat());
    let many = bowditch(&[&args[..], &["--threads", "8"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, many.stdout);
}
