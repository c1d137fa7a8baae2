//! JSON scenario configuration with sections
//! `{model, fading, antenna, quadrature, sim, sweep}`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analytic::AnalysisConfig;
use crate::antenna::AntennaSpec;
use crate::asymptotics::RegimeThresholds;
use crate::channel::ModelSpec;
use crate::fading::FadingModel;
use crate::montecarlo::{Estimator, SimConfig};
use crate::quadrature::QuadratureSpec;
use crate::units::db_to_linear;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed configuration: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engines {
    Analytic,
    #[serde(alias = "mc")]
    Montecarlo,
    Both,
}

impl Engines {
    pub fn analytic(self) -> bool {
        matches!(self, Engines::Analytic | Engines::Both)
    }

    pub fn montecarlo(self) -> bool {
        matches!(self, Engines::Montecarlo | Engines::Both)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Engines::Analytic => "analytic",
            Engines::Montecarlo => "montecarlo",
            Engines::Both => "both",
        }
    }
}

impl std::str::FromStr for Engines {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "analytic" => Ok(Engines::Analytic),
            "mc" | "montecarlo" => Ok(Engines::Montecarlo),
            "both" => Ok(Engines::Both),
            _ => Err(format!(
                "unknown engine {s:?}, expected analytic, mc or both"
            )),
        }
    }
}

/// Density grid: an explicit list or a log-spaced range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaGrid {
    List(Vec<f64>),
    LogSpaced { from: f64, to: f64, per_decade: u32 },
}

impl Default for LambdaGrid {
    fn default() -> Self {
        LambdaGrid::LogSpaced {
            from: 0.1,
            to: 1e5,
            per_decade: 10,
        }
    }
}

impl LambdaGrid {
    pub fn points(&self) -> Vec<f64> {
        match self {
            LambdaGrid::List(v) => v.clone(),
            LambdaGrid::LogSpaced {
                from,
                to,
                per_decade,
            } => {
                if !(*from > 0.0 && to >= from && *per_decade > 0) {
                    return Vec::new();
                }
                let (a, b) = (from.log10(), to.log10());
                let steps = ((b - a) * f64::from(*per_decade)).round() as i64;
                (0..=steps)
                    .map(|i| {
                        let e = a + i as f64 / f64::from(*per_decade);
                        // Snap to the decimal grid so points print cleanly.
                        let v = 10f64.powf(e);
                        format!("{v:.6e}").parse().unwrap_or(v)
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyTolerances {
    /// Absolute floor on `|p_analytic - p_mc|`.
    pub p_cov_abs: f64,
    /// Relative floor on the ASE difference.
    pub ase_rel: f64,
    /// Multiple of the MC confidence half-width accepted.
    pub ci_multiple: f64,
    /// Quadrature tolerances looser than this mark the analytic run degraded.
    pub max_quadrature_tol: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        Self {
            p_cov_abs: 0.02,
            ase_rel: 0.10,
            ci_multiple: 3.0,
            max_quadrature_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub trials: u64,
    pub seed: u64,
    /// `null` applies the default radius rule.
    pub sim_radius_km: Option<f64>,
    pub min_expected_bs: f64,
    pub gamma_cap_db: f64,
    /// Densities above this are skipped by the simulator unless overridden.
    pub max_lambda: f64,
    pub estimator: Estimator,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            trials: 10_000,
            seed: 1,
            sim_radius_km: None,
            min_expected_bs: 100.0,
            gamma_cap_db: 60.0,
            max_lambda: 1e4,
            estimator: Estimator::Indicator,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Height differences (m). Empty uses the model's own value.
    pub l_m: Vec<f64>,
    pub lambda: LambdaGrid,
    /// Coverage threshold and minimum working SINR (dB).
    pub gamma_db: f64,
    pub engines: Engines,
    pub tx_power_dbm: f64,
    /// `null` gives the interference-limited case.
    pub noise_power_dbm: Option<f64>,
    /// Compute the ASE as well as the coverage probability.
    pub ase: bool,
    pub regimes: RegimeThresholds,
    pub verify: VerifyTolerances,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            l_m: Vec::new(),
            lambda: LambdaGrid::default(),
            gamma_db: 0.0,
            engines: Engines::Analytic,
            tx_power_dbm: 24.0,
            noise_power_dbm: Some(-95.0),
            ase: true,
            regimes: RegimeThresholds::default(),
            verify: VerifyTolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub model: ModelSpec,
    #[serde(default)]
    pub fading: FadingModel,
    #[serde(default)]
    pub antenna: Option<AntennaSpec>,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serialises")
    }

    /// SHA-256 of the compact JSON form, hex encoded.
    pub fn spec_hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("configuration serialises");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn heights_m(&self) -> Vec<f64> {
        if self.sweep.l_m.is_empty() {
            vec![self.model.height_diff_m()]
        } else {
            self.sweep.l_m.clone()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        let grid = self.sweep.lambda.points();
        if grid.is_empty() {
            return bad("density grid is empty".into());
        }
        if grid.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return bad("densities must be positive and finite".into());
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("density grid must be strictly increasing".into());
        }
        if self
            .heights_m()
            .iter()
            .any(|&l| !(l >= 0.0 && l.is_finite()))
        {
            return bad("height differences must be non-negative".into());
        }
        if !self.sweep.gamma_db.is_finite() {
            return bad("gamma_db must be finite".into());
        }
        if let Some(a) = &self.antenna {
            a.validate()
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        for l in self.heights_m() {
            self.analysis(l)?;
        }
        Ok(())
    }

    pub fn gamma(&self) -> f64 {
        db_to_linear(self.sweep.gamma_db)
    }

    /// Engine configuration at height difference `l_m`. dB quantities are
    /// converted here; the engines work in linear units only.
    pub fn analysis(&self, l_m: f64) -> Result<AnalysisConfig, ConfigError> {
        let model = self
            .model
            .clone()
            .with_height_diff_m(l_m)
            .build()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let noise = self.sweep.noise_power_dbm.unwrap_or(f64::NEG_INFINITY);
        let cfg = AnalysisConfig::new(model)
            .with_fading(self.fading)
            .with_powers_dbm(self.sweep.tx_power_dbm, noise)
            .with_quadrature(self.quadrature);
        cfg.validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(cfg)
    }

    pub fn sim(&self, analysis: AnalysisConfig, lambda: f64, seed: u64) -> SimConfig {
        SimConfig {
            antenna: self.antenna,
            sim_radius: self.sim.sim_radius_km,
            trials: self.sim.trials,
            seed,
            min_expected_bs: self.sim.min_expected_bs,
            gamma_cap: db_to_linear(self.sim.gamma_cap_db),
            estimator: self.sim.estimator,
            ..SimConfig::new(analysis, lambda)
        }
    }
}
