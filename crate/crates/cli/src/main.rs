use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use udn_core::antenna::{self, AntennaSpec};
use udn_core::config::{Engines, ScenarioConfig};
use udn_core::sweep::{self, RunOptions, TableFormat};
use udn_core::{par, scenarios};

#[derive(Parser)]
#[command(
    name = "udn",
    version,
    about = "Coverage and ASE sweeps for dense cellular networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a scenario over its density grid and write CSV/JSON tables.
    Sweep {
        /// Scenario file, or the name of a bundled scenario.
        #[arg(long)]
        config: String,
        #[arg(long)]
        engine: Option<Engines>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: UDN_THREADS or all cores).
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Both)]
        format: Format,
        /// Simulate densities above the scenario's simulation cap.
        #[arg(long)]
        allow_dense: bool,
    },
    /// Compare the analytic and simulated engines. Exit status 0 on pass,
    /// 2 on a tolerance failure, 3 on degraded convergence.
    Verify {
        #[arg(long)]
        config: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        /// Also write the report as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        allow_dense: bool,
    },
    /// Bundled scenarios.
    Scenarios {
        #[command(subcommand)]
        action: ScenarioAction,
    },
    /// Antenna gain against elevation at the downtilt for a density.
    Pattern {
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 8.5)]
        l_m: f64,
    },
}

#[derive(Subcommand)]
enum ScenarioAction {
    List,
    Show { name: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

fn load(config: &str) -> Result<ScenarioConfig, String> {
    let path = Path::new(config);
    if path.exists() {
        return ScenarioConfig::from_path(path).map_err(|e| e.to_string());
    }
    match scenarios::load(config) {
        Some(r) => r.map_err(|e| e.to_string()),
        None => Err(format!("no file or bundled scenario named {config:?}")),
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Sweep {
            config,
            engine,
            out,
            seed,
            threads,
            format,
            allow_dense,
        } => {
            let cfg = load(&config)?;
            let workers = par::configure_threads(threads);
            eprintln!("scenario {} on {workers} worker(s)", cfg.name);
            let opts = RunOptions {
                engines: engine,
                seed,
                allow_dense,
            };
            let report = sweep::run_sweep(&cfg, &opts).map_err(|e| e.to_string())?;
            std::fs::create_dir_all(&out)
                .map_err(|e| format!("cannot create {}: {e}", out.display()))?;
            let formats: &[TableFormat] = match format {
                Format::Csv => &[TableFormat::Csv],
                Format::Json => &[TableFormat::Json],
                Format::Both => &[TableFormat::Csv, TableFormat::Json],
            };
            for &f in formats {
                let ext = match f {
                    TableFormat::Csv => "csv",
                    TableFormat::Json => "json",
                };
                let path = out.join(format!("{}.{ext}", cfg.name));
                sweep::write_table(&report, f, &path).map_err(|e| e.to_string())?;
                eprintln!("wrote {}", path.display());
            }
            let total: f64 = report.rows.iter().map(|r| r.wall_time).sum();
            let failed = report.rows.iter().filter(|r| r.error.is_some()).count();
            eprintln!(
                "{} rows, {failed} with errors, {total:.1} s of compute",
                report.rows.len()
            );
            for d in &report.diagnostics {
                match &d.diagnostics {
                    Some(x) => eprintln!(
                        "L = {} m ({}): peak {:.3} at {}, crawl {:?}, crash onset {:?}",
                        d.l_m,
                        d.engine.as_str(),
                        x.peak_ase,
                        x.peak_lambda,
                        x.crawl_interval,
                        x.crash_onset
                    ),
                    None => eprintln!(
                        "L = {} m ({}): {}",
                        d.l_m,
                        d.engine.as_str(),
                        d.error.as_deref().unwrap_or("")
                    ),
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            config,
            seed,
            threads,
            out,
            allow_dense,
        } => {
            let cfg = load(&config)?;
            par::configure_threads(threads);
            let opts = RunOptions {
                engines: Some(Engines::Both),
                seed,
                allow_dense,
            };
            let report = sweep::verify(&cfg, &opts).map_err(|e| e.to_string())?;
            println!("lambda,L_m,p_cov_analytic,p_cov_mc,p_cov_diff,p_cov_tol,ase_analytic,ase_mc,ase_diff,ase_tol,pass");
            let f = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
            for p in &report.points {
                println!(
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    p.lambda,
                    p.l_m,
                    f(p.p_cov_analytic),
                    f(p.p_cov_mc),
                    f(p.p_cov_diff),
                    f(p.p_cov_tol),
                    f(p.ase_analytic),
                    f(p.ase_mc),
                    f(p.ase_diff),
                    f(p.ase_tol),
                    p.passed
                );
            }
            if let Some(reason) = &report.degraded_reason {
                eprintln!("degraded convergence: {reason}");
            }
            eprintln!("status: {:?}", report.status);
            if let Some(path) = out {
                let text = serde_json::to_string_pretty(&report).expect("report serialises");
                std::fs::write(&path, text)
                    .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            }
            Ok(ExitCode::from(report.status.exit_code() as u8))
        }
        Command::Scenarios { action } => {
            match action {
                ScenarioAction::List => {
                    for name in scenarios::names() {
                        let cfg = load(name)?;
                        println!("{name:<24} {}", cfg.description);
                    }
                }
                ScenarioAction::Show { name } => {
                    let text = scenarios::raw(&name)
                        .ok_or_else(|| format!("no bundled scenario {name:?}"))?;
                    print!("{text}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Pattern { lambda, l_m } => {
            if lambda.is_nan() || lambda <= 0.0 {
                return Err("lambda must be positive".into());
            }
            let spec = AntennaSpec::default();
            let tilt = antenna::downtilt_for_density(lambda, l_m / 1000.0, &spec);
            println!("theta_deg,tilt_deg,gain_db");
            for i in 0..=180 {
                let theta = -90.0 + i as f64;
                println!(
                    "{theta},{tilt},{}",
                    antenna::total_gain(0.0, theta, tilt, &spec)
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
