//! Density sweeps over one scenario, table output, and the analytic versus
//! Monte Carlo comparison.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{area_spectral_efficiency, coverage_probability};
use crate::asymptotics::{classify_curve, CrashDiagnostics};
use crate::config::{ConfigError, Engines, ScenarioConfig};
use crate::montecarlo::simulate;
use crate::par;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("no rows to write")]
    Empty,
    #[error("cannot write {path}: {reason}")]
    Write { path: String, reason: String },
    #[error("verification needs both engines")]
    NeedsBothEngines,
}

pub type Result<T> = std::result::Result<T, SweepError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub engines: Option<Engines>,
    pub seed: Option<u64>,
    /// Simulate densities above the configured cap.
    pub allow_dense: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub lambda: f64,
    pub l_m: f64,
    pub gamma_db: f64,
    pub p_cov_analytic: Option<f64>,
    pub ase_analytic: Option<f64>,
    /// All analytic integrals met their tolerances.
    pub analytic_converged: Option<bool>,
    pub p_cov_mc: Option<f64>,
    pub p_cov_mc_ci: Option<f64>,
    pub ase_mc: Option<f64>,
    pub ase_mc_ci: Option<f64>,
    pub trials: Option<u64>,
    pub resampled_empty: Option<u64>,
    /// Engines that produced values for this row.
    pub engine: Engines,
    pub seed: u64,
    pub error: Option<String>,
    /// Seconds spent on the row. Not serialised, so reruns stay byte-identical.
    #[serde(skip)]
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveDiagnostics {
    pub l_m: f64,
    pub engine: Engines,
    pub diagnostics: Option<CrashDiagnostics>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub scenario: String,
    pub spec_hash: String,
    pub crate_version: String,
    pub engines: Engines,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub metadata: Metadata,
    pub rows: Vec<ResultRow>,
    pub diagnostics: Vec<CurveDiagnostics>,
}

pub fn run_sweep(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<SweepReport> {
    cfg.validate()?;
    let engines = opts.engines.unwrap_or(cfg.sweep.engines);
    let seed = opts.seed.unwrap_or(cfg.sim.seed);
    let grid = cfg.sweep.lambda.points();
    let heights = cfg.heights_m();
    let points: Vec<(f64, f64)> = heights
        .iter()
        .flat_map(|&l| grid.iter().map(move |&lambda| (l, lambda)))
        .collect();
    let rows = par::map_slice(&points, |&(l_m, lambda)| {
        run_point(cfg, engines, seed, opts, l_m, lambda)
    });

    let mut diagnostics = Vec::new();
    for &l_m in &heights {
        let curve: Vec<&ResultRow> = rows.iter().filter(|r| r.l_m == l_m).collect();
        for (engine, pick) in [
            (
                Engines::Analytic,
                (|r: &ResultRow| r.ase_analytic) as fn(&ResultRow) -> Option<f64>,
            ),
            (Engines::Montecarlo, |r: &ResultRow| r.ase_mc),
        ] {
            let on = match engine {
                Engines::Analytic => engines.analytic(),
                _ => engines.montecarlo(),
            };
            if !on || !cfg.sweep.ase {
                continue;
            }
            let (l, a): (Vec<f64>, Vec<f64>) = curve
                .iter()
                .filter_map(|r| Some((r.lambda, pick(r)?)))
                .unzip();
            let (found, error) = match classify_curve(&l, &a, &cfg.sweep.regimes) {
                Ok(d) => (Some(d), None),
                Err(e) => (None, Some(e.to_string())),
            };
            diagnostics.push(CurveDiagnostics {
                l_m,
                engine,
                diagnostics: found,
                error,
            });
        }
    }
    Ok(SweepReport {
        metadata: Metadata {
            scenario: cfg.name.clone(),
            spec_hash: cfg.spec_hash(),
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            engines,
            seed,
        },
        rows,
        diagnostics,
    })
}

fn run_point(
    cfg: &ScenarioConfig,
    engines: Engines,
    seed: u64,
    opts: &RunOptions,
    l_m: f64,
    lambda: f64,
) -> ResultRow {
    let start = Instant::now();
    let mut row = ResultRow {
        lambda,
        l_m,
        gamma_db: cfg.sweep.gamma_db,
        p_cov_analytic: None,
        ase_analytic: None,
        analytic_converged: None,
        p_cov_mc: None,
        p_cov_mc_ci: None,
        ase_mc: None,
        ase_mc_ci: None,
        trials: None,
        resampled_empty: None,
        engine: engines,
        seed,
        error: None,
        wall_time: 0.0,
    };
    let mut errors = Vec::new();
    let gamma = cfg.gamma();
    match cfg.analysis(l_m) {
        Err(e) => errors.push(e.to_string()),
        Ok(analysis) => {
            if engines.analytic() {
                let res = if cfg.sweep.ase {
                    area_spectral_efficiency(&analysis, lambda, gamma)
                        .map(|a| (a.p_cov_at_gamma0, Some(a.ase), a.converged))
                } else {
                    coverage_probability(&analysis, lambda, gamma)
                        .map(|p| (p.p_cov, None, p.converged))
                };
                match res {
                    Ok((p, ase, conv)) => {
                        row.p_cov_analytic = Some(p);
                        row.ase_analytic = ase;
                        row.analytic_converged = Some(conv);
                    }
                    Err(e) => errors.push(format!("analytic: {e}")),
                }
            }
            if engines.montecarlo() {
                if lambda > cfg.sim.max_lambda && !opts.allow_dense {
                    errors.push(format!(
                        "montecarlo: density above the simulation cap {}",
                        cfg.sim.max_lambda
                    ));
                } else {
                    match simulate(&cfg.sim(analysis, lambda, seed), &[gamma], gamma) {
                        Ok(s) => {
                            let cov = s.coverage[0].1;
                            row.p_cov_mc = Some(cov.mean);
                            row.p_cov_mc_ci = Some(cov.ci_half_width);
                            if cfg.sweep.ase {
                                row.ase_mc = Some(s.ase.mean);
                                row.ase_mc_ci = Some(s.ase.ci_half_width);
                            }
                            row.trials = Some(s.trials);
                            row.resampled_empty = Some(s.resampled_empty);
                        }
                        Err(e) => errors.push(format!("montecarlo: {e}")),
                    }
                }
            }
        }
    }
    if !errors.is_empty() {
        row.error = Some(errors.join("; "));
    }
    row.wall_time = start.elapsed().as_secs_f64();
    row
}

pub const CSV_COLUMNS: [&str; 11] = [
    "lambda_bs_per_km2",
    "L_m",
    "gamma_db",
    "p_cov_analytic",
    "ase_analytic_bps_hz_km2",
    "p_cov_mc",
    "p_cov_mc_ci",
    "ase_mc",
    "ase_mc_ci",
    "engine",
    "seed",
];

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn render_csv(rows: &[ResultRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(SweepError::Empty);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let wrap = |e: csv::Error| SweepError::Write {
        path: "<memory>".into(),
        reason: e.to_string(),
    };
    w.write_record(CSV_COLUMNS).map_err(wrap)?;
    for r in rows {
        w.write_record([
            r.lambda.to_string(),
            r.l_m.to_string(),
            r.gamma_db.to_string(),
            cell(r.p_cov_analytic),
            cell(r.ase_analytic),
            cell(r.p_cov_mc),
            cell(r.p_cov_mc_ci),
            cell(r.ase_mc),
            cell(r.ase_mc_ci),
            r.engine.as_str().to_string(),
            r.seed.to_string(),
        ])
        .map_err(wrap)?;
    }
    let bytes = w.into_inner().map_err(|e| SweepError::Write {
        path: "<memory>".into(),
        reason: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn render_json(report: &SweepReport) -> Result<String> {
    if report.rows.is_empty() {
        return Err(SweepError::Empty);
    }
    let mut s = serde_json::to_string_pretty(report).expect("report serialises");
    s.push('\n');
    Ok(s)
}

/// Writes the report as CSV (rows only) or JSON (rows, diagnostics, metadata).
pub fn write_table(report: &SweepReport, format: TableFormat, path: &Path) -> Result<()> {
    let text = match format {
        TableFormat::Csv => render_csv(&report.rows)?,
        TableFormat::Json => render_json(report)?,
    };
    std::fs::write(path, text).map_err(|e| SweepError::Write {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

pub fn read_json_report(text: &str) -> std::result::Result<SweepReport, serde_json::Error> {
    serde_json::from_str(text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyPoint {
    pub lambda: f64,
    pub l_m: f64,
    pub p_cov_analytic: Option<f64>,
    pub p_cov_mc: Option<f64>,
    pub p_cov_diff: Option<f64>,
    pub p_cov_tol: Option<f64>,
    pub ase_analytic: Option<f64>,
    pub ase_mc: Option<f64>,
    pub ase_diff: Option<f64>,
    pub ase_tol: Option<f64>,
    pub passed: bool,
    pub converged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyStatus {
    Pass,
    ToleranceFailure,
    ConvergenceFailure,
}

impl VerifyStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            VerifyStatus::Pass => 0,
            VerifyStatus::ToleranceFailure => 2,
            VerifyStatus::ConvergenceFailure => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub scenario: String,
    pub points: Vec<VerifyPoint>,
    /// Analytic tolerances are looser than the verification ceiling or an
    /// integral failed to converge.
    pub degraded_convergence: bool,
    pub degraded_reason: Option<String>,
    pub status: VerifyStatus,
}

/// Runs both engines over the scenario grid (densities up to the simulation
/// cap) and compares them point by point.
pub fn verify(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<VerifyReport> {
    if opts.engines.unwrap_or(cfg.sweep.engines) != Engines::Both {
        return Err(SweepError::NeedsBothEngines);
    }
    let mut capped = cfg.clone();
    if !opts.allow_dense {
        let pts: Vec<f64> = cfg
            .sweep
            .lambda
            .points()
            .into_iter()
            .filter(|&l| l <= cfg.sim.max_lambda)
            .collect();
        capped.sweep.lambda = crate::config::LambdaGrid::List(pts);
    }
    let report = run_sweep(&capped, opts)?;
    let tol = cfg.sweep.verify;
    let mut points = Vec::new();
    for r in &report.rows {
        let p_diff = r.p_cov_analytic.zip(r.p_cov_mc).map(|(a, m)| (a - m).abs());
        let p_tol = r
            .p_cov_mc_ci
            .map(|ci| tol.p_cov_abs.max(tol.ci_multiple * ci));
        let ase_diff = r.ase_analytic.zip(r.ase_mc).map(|(a, m)| (a - m).abs());
        let ase_tol = r
            .ase_analytic
            .zip(r.ase_mc_ci)
            .map(|(a, ci)| (tol.ase_rel * a).max(tol.ci_multiple * ci));
        let within = |d: Option<f64>, t: Option<f64>| d.zip(t).map(|(d, t)| d <= t);
        let passed = r.error.is_none()
            && within(p_diff, p_tol) == Some(true)
            && within(ase_diff, ase_tol).unwrap_or(!cfg.sweep.ase);
        points.push(VerifyPoint {
            lambda: r.lambda,
            l_m: r.l_m,
            p_cov_analytic: r.p_cov_analytic,
            p_cov_mc: r.p_cov_mc,
            p_cov_diff: p_diff,
            p_cov_tol: p_tol,
            ase_analytic: r.ase_analytic,
            ase_mc: r.ase_mc,
            ase_diff,
            ase_tol,
            passed,
            converged: r.analytic_converged.unwrap_or(false),
            error: r.error.clone(),
        });
    }
    let q = &cfg.quadrature;
    let loosest = [q.rel_tol, q.outer_rel_tol, q.ase_rel_tol]
        .into_iter()
        .fold(0.0, f64::max);
    let degraded_reason = if loosest > tol.max_quadrature_tol {
        Some(format!(
            "quadrature tolerance {loosest:e} is looser than the verification ceiling {:e}",
            tol.max_quadrature_tol
        ))
    } else if points.iter().any(|p| !p.converged) {
        Some("an analytic integral did not converge".into())
    } else {
        None
    };
    let status = if degraded_reason.is_some() {
        VerifyStatus::ConvergenceFailure
    } else if points.iter().all(|p| p.passed) {
        VerifyStatus::Pass
    } else {
        VerifyStatus::ToleranceFailure
    };
    Ok(VerifyReport {
        scenario: cfg.name.clone(),
        points,
        degraded_convergence: degraded_reason.is_some(),
        degraded_reason,
        status,
    })
}
