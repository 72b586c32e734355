use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn copol(args: &[&str], seed_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_copol"));
    cmd.args(args).env_remove("COPOL_SEED");
    if let Some(s) = seed_env {
        cmd.env("COPOL_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn metric(report: &Value, name: &str) -> f64 {
    report["metrics"].as_array().unwrap().iter().find(|m| m["name"] == name).unwrap()["value"].as_f64().unwrap()
}

#[test]
fn check_examples() {
    let o = copol(&["check", "isometry", "rotation(i)", "bergman:0"], None);
    assert_eq!(code(&o), 0);
    assert!(metric(&json(&o), "isometry_defect") < 1e-10);

    let o = copol(&["check", "norm", "z3", "s2"], None);
    assert_eq!(code(&o), 0);
    assert!((metric(&json(&o), "norm_estimate") - 3.0).abs() < 1e-8);

    let o = copol(&["check", "bounds", "moebius(1,0.5)", "bergman:0"], None);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert!((metric(&r, "lower") - 4.0 / 3.0).abs() < 1e-12);
    assert!((metric(&r, "upper") - 3.0).abs() < 1e-12);
}

#[test]
fn failing_checks_exit_one() {
    assert_eq!(code(&copol(&["check", "isometry", "z2", "bergman"], None)), 1);
    assert_eq!(code(&copol(&["check", "unitary", "z2"], None)), 1);
    // Refused at this truncation: recorded as a failure, not a crash.
    let o = copol(&["check", "isometry", "z3", "--trunc", "4"], None);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("refused"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&copol(&["check", "frobnicate", "z2"], None)), 2);
    assert_eq!(code(&copol(&["check", "isometry", "poly(0,2)"], None)), 2);
    assert_eq!(code(&copol(&["check", "isometry", "z2", "dirichlet", "x"], None)), 2);
    assert_eq!(code(&copol(&["matrix", "z2", "--trunc", "3"], None)), 2);
    assert_eq!(code(&copol(&["nonsense"], None)), 2);
    assert_eq!(code(&copol(&["check", "norm", "z2"], Some("abc"))), 2);
    assert_eq!(code(&copol(&["verify-paper", "--config", "/nonexistent/config.json"], None)), 2);
}

#[test]
fn matrix_outputs() {
    let o = copol(&["matrix", "rotation(1)", "hardy", "--trunc", "6"], None);
    assert_eq!(code(&o), 0);
    let m = json(&o);
    let entries = m["entries"].as_array().unwrap();
    for (i, row) in entries.iter().enumerate() {
        for (j, e) in row.as_array().unwrap().iter().enumerate() {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert_eq!(e[0].as_f64().unwrap(), expect);
            assert_eq!(e[1].as_f64().unwrap(), 0.0);
        }
    }

    let o = copol(&["matrix", "z3", "s2", "--trunc", "9"], None);
    let m = json(&o);
    let mut nonzero = Vec::new();
    for (i, row) in m["entries"].as_array().unwrap().iter().enumerate() {
        for (j, e) in row.as_array().unwrap().iter().enumerate() {
            if e[0].as_f64().unwrap() != 0.0 {
                nonzero.push((i, j, e[0].as_f64().unwrap()));
            }
        }
    }
    assert_eq!(nonzero, vec![(0, 0, 1.0), (3, 1, 3.0), (6, 2, 3.0), (9, 3, 3.0)]);
    assert_eq!(m["exact_cols"], 3);

    let o = copol(&["matrix", "z2", "bergman", "--trunc", "4", "--format", "csv"], None);
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<_> = text.lines().skip(1).filter(|l| l.split(',').nth(2) != Some("0e0")).collect();
    let cells: Vec<_> = rows.iter().map(|l| l.split(',').take(2).collect::<Vec<_>>().join(",")).collect();
    assert_eq!(cells, ["0,0", "2,1", "4,2"]);
}

#[test]
fn config_maps_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.csv");
    let cfg = write(
        dir.path(),
        "cfg.json",
        &format!(
            r#"{{"space": "s2", "truncation": 30,
                "maps": {{"cube": {{"type": "poly", "coeffs": [[0,0],[0,0],[0,0],[1,0]]}}}},
                "output": {{"path": "{}", "format": "csv"}}}}"#,
            out.display()
        ),
    );
    let o = copol(&["check", "norm", "cube", "--config", &cfg], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("check,metric,value,tolerance,verdict\n"));
    assert!(csv.contains("norm,norm_estimate,2.99999999999999"));
    // The single configured map is the default.
    assert_eq!(code(&copol(&["check", "recover", "--config", &cfg, "--out", out.to_str().unwrap()], None)), 0);

    let bad = write(dir.path(), "bad.json", r#"{"maps": {"m": {"type": "rotation", "lambda": [2, 0]}}}"#);
    assert_eq!(code(&copol(&["check", "norm", "z2", "--config", &bad], None)), 2);
}

#[test]
fn verify_paper_is_deterministic_and_honours_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let s = dir.path().join("s.json");
    let run = |out: &Path, extra: &[&str], env: Option<&str>| {
        let mut args = vec!["verify-paper", "--trunc", "32", "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        code(&copol(&args, env))
    };
    assert_eq!(run(&a, &[], Some("11")), 0);
    assert_eq!(run(&b, &["--serial"], Some("11")), 0);
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb, "identical config and seed must give identical reports");
    let report: Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(report["inputs"]["seed"], "11");
    assert_eq!(report["children"].as_array().unwrap().len(), 10);

    // The flag beats the environment.
    assert_eq!(run(&s, &["--seed", "12"], Some("11")), 0);
    let report: Value = serde_json::from_slice(&std::fs::read(&s).unwrap()).unwrap();
    assert_eq!(report["inputs"]["seed"], "12");
}

#[test]
fn verify_paper_failures() {
    let o = copol(&["verify-paper", "--trunc", "4"], None);
    assert_eq!(code(&o), 1);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("exact block too small"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.json", r#"{"tolerances": {"defect_zero": 1e-20, "norm_exact": 1e-20}}"#);
    let o = copol(&["verify-paper", "--config", &cfg, "--format", "csv"], None);
    assert_eq!(code(&o), 1);
    let csv = String::from_utf8_lossy(&o.stdout);
    assert!(csv.lines().any(|l| l.contains("norm_estimate") && l.ends_with(",fail")));
}
