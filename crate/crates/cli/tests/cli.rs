use std::path::Path;
use std::process::{Command, Output};

fn udn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_udn"))
        .args(args)
        .env("UDN_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn scenario(dir: &Path, extra: &str) -> String {
    let path = dir.join("small.json");
    let text = format!(
        r#"{{
            "name": "small",
            "model": {{ "type": "case1", "l_m": 8.5 }},
            {extra}
            "sim": {{ "trials": 2000, "seed": 5 }},
            "sweep": {{ "lambda": [10.0, 100.0, 1000.0], "engines": "both" }}
        }}"#
    );
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn lists_and_shows_bundled_scenarios() {
    let out = udn(&["scenarios", "list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 9);
    assert!(text.contains("fig3_case1_L8.5"));

    let out = udn(&["scenarios", "show", "fig7_rician_L8.5"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("\"rician\""));
}

#[test]
fn sweep_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), "");
    let out_dir = dir.path().join("out");
    let out = udn(&[
        "sweep",
        "--config",
        &cfg,
        "--engine",
        "analytic",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(out_dir.join("small.csv")).unwrap();
    assert!(csv.starts_with("lambda_bs_per_km2,L_m,gamma_db,p_cov_analytic"));
    assert_eq!(csv.lines().count(), 4);
    let json = std::fs::read_to_string(out_dir.join("small.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["metadata"]["scenario"], "small");
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn verify_exit_status_reflects_the_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let sound = scenario(dir.path(), "");
    let out = udn(&["verify", "--config", &sound]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );

    let loose = scenario(dir.path(), r#""quadrature": { "rel_tol": 0.1 },"#);
    let out = udn(&["verify", "--config", &loose]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degraded"));
}

#[test]
fn pattern_prints_the_vertical_cut() {
    let out = udn(&["pattern", "--lambda", "1000"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 182);
    let peak = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .fold(f64::MIN, f64::max);
    assert!(peak <= 8.15 && peak > 8.0);
}

#[test]
fn bad_input_fails_cleanly() {
    let out = udn(&["sweep", "--config", "no_such_scenario"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no file or bundled scenario"));

    let out = udn(&[
        "sweep",
        "--config",
        "fig3_case1_L8.5",
        "--engine",
        "quantum",
    ]);
    assert!(!out.status.success());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"name": "b", "model": {"type": "case9"}}"#).unwrap();
    let out = udn(&["sweep", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
