use std::path::PathBuf;

use udn_core::config::{Engines, LambdaGrid, ScenarioConfig};
use udn_core::scenarios;
use udn_core::sweep::{
    read_json_report, render_csv, render_json, run_sweep, verify, write_table, RunOptions,
    SweepError, TableFormat, VerifyStatus, CSV_COLUMNS,
};

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/fig3_case1_L8.5_golden.csv")
}

fn golden_scenario() -> ScenarioConfig {
    let mut cfg = scenarios::load("fig3_case1_L8.5").unwrap().unwrap();
    cfg.sweep.lambda = LambdaGrid::List(vec![10.0, 30.0, 100.0, 300.0, 1e3, 3e3, 1e4, 3e4]);
    cfg.sim.trials = 1_000;
    cfg.sim.max_lambda = 1e3;
    cfg
}

fn small(engines: &str, extra: &str) -> ScenarioConfig {
    ScenarioConfig::from_json(&format!(
        r#"{{
            "name": "small",
            "model": {{ "type": "case1", "l_m": 8.5 }},
            "sim": {{ "trials": 4000, "seed": 3 }},
            "sweep": {{ "lambda": [10.0, 100.0, 1000.0], "engines": "{engines}" {extra} }}
        }}"#
    ))
    .unwrap()
}

#[test]
fn golden_table_is_reproduced_byte_for_byte() {
    let cfg = golden_scenario();
    let report = run_sweep(&cfg, &RunOptions::default()).unwrap();
    let csv = render_csv(&report.rows).unwrap();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(golden_path(), &csv).unwrap();
    }
    let golden = std::fs::read_to_string(golden_path()).expect("golden file present");
    assert_eq!(csv, golden);

    let again = run_sweep(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(render_csv(&again.rows).unwrap(), csv);
    assert_eq!(render_json(&again).unwrap(), render_json(&report).unwrap());

    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    assert_eq!(header, CSV_COLUMNS);
    assert_eq!(csv.lines().count(), 9);

    for row in &report.rows {
        assert!(row.p_cov_analytic.is_some());
        if row.lambda > cfg.sim.max_lambda {
            assert!(row.p_cov_mc.is_none());
            assert!(row.error.as_deref().unwrap().contains("simulation cap"));
        } else {
            assert!(row.p_cov_mc.is_some());
        }
    }
}

#[test]
fn json_report_round_trips() {
    let cfg = small("analytic", "");
    let mut report = run_sweep(&cfg, &RunOptions::default()).unwrap();
    let text = render_json(&report).unwrap();
    let back = read_json_report(&text).unwrap();
    for r in &mut report.rows {
        r.wall_time = 0.0;
    }
    assert_eq!(back, report);
    assert_eq!(back.metadata.spec_hash, cfg.spec_hash());
    assert_eq!(back.metadata.engines, Engines::Analytic);
}

#[test]
fn tables_are_written_to_disk() {
    let cfg = small("analytic", r#", "ase": false"#);
    let report = run_sweep(&cfg, &RunOptions::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for (format, name) in [(TableFormat::Csv, "t.csv"), (TableFormat::Json, "t.json")] {
        let path = dir.path().join(name);
        write_table(&report, format, &path).unwrap();
        assert!(std::fs::metadata(&path).unwrap().len() > 0);
    }
    let missing = dir.path().join("no/such/dir/t.csv");
    assert!(matches!(
        write_table(&report, TableFormat::Csv, &missing),
        Err(SweepError::Write { .. })
    ));
}

#[test]
fn empty_inputs_are_rejected() {
    let r = ScenarioConfig::from_json(
        r#"{"name": "e", "model": {"type": "case1"}, "sweep": {"lambda": []}}"#,
    );
    assert!(r.is_err());
    assert!(matches!(render_csv(&[]), Err(SweepError::Empty)));
}

#[test]
fn verification_passes_on_a_sound_configuration() {
    let report = verify(&small("both", ""), &RunOptions::default()).unwrap();
    assert_eq!(report.status, VerifyStatus::Pass, "{report:?}");
    assert_eq!(report.status.exit_code(), 0);
    assert_eq!(report.points.len(), 3);
}

#[test]
fn loose_quadrature_is_reported_as_degraded() {
    let mut cfg = small("both", "");
    cfg.quadrature.rel_tol = 1e-1;
    let report = verify(&cfg, &RunOptions::default()).unwrap();
    assert!(report.degraded_convergence);
    assert_eq!(report.status, VerifyStatus::ConvergenceFailure);
    assert_eq!(report.status.exit_code(), 3);
}

#[test]
fn impossible_tolerances_are_reported_as_failures() {
    let cfg = small(
        "both",
        r#", "verify": { "p_cov_abs": 0.0, "ase_rel": 0.0, "ci_multiple": 0.0 }"#,
    );
    let report = verify(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(report.status, VerifyStatus::ToleranceFailure);
    assert_eq!(report.status.exit_code(), 2);
}

#[test]
fn verification_needs_both_engines() {
    assert!(matches!(
        verify(&small("analytic", ""), &RunOptions::default()),
        Err(SweepError::NeedsBothEngines)
    ));
}

#[test]
fn dense_points_are_simulated_only_on_request() {
    let mut cfg = small("montecarlo", r#", "ase": false"#);
    cfg.sim.max_lambda = 50.0;
    cfg.sim.trials = 1_000;
    let capped = run_sweep(&cfg, &RunOptions::default()).unwrap();
    assert!(capped.rows[0].p_cov_mc.is_some());
    assert!(capped.rows[1].p_cov_mc.is_none() && capped.rows[1].error.is_some());
    let opts = RunOptions {
        allow_dense: true,
        ..RunOptions::default()
    };
    let dense = run_sweep(&cfg, &opts).unwrap();
    assert!(dense
        .rows
        .iter()
        .all(|r| r.p_cov_mc.is_some() && r.error.is_none()));
}

#[test]
fn every_bundled_scenario_has_a_usable_grid() {
    for name in scenarios::names() {
        let cfg = scenarios::load(name).unwrap().unwrap();
        assert!(cfg.sweep.lambda.points().len() >= 5, "{name}");
        for l in cfg.heights_m() {
            cfg.analysis(l).unwrap();
        }
    }
}
