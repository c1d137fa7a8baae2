//! Coverage probability and area spectral efficiency of a PPP network with
//! multi-slope LoS/NLoS path loss and an antenna height difference.
//!
//! The typical user sits at the origin and attaches to the base station with
//! the smallest path loss. Coverage is summed over the (segment, path type)
//! of the serving link:
//!
//! `p_cov = sum_n int f_n(r) * Pr[SINR > gamma | serving link] dr`.

mod ase;
mod geometry;
mod interference;
mod rician;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{ChannelError, PathLossModel, PathType};
use crate::fading::{Fading, FadingModel};
use crate::quadrature::{integrate_with_breaks, QuadError, QuadratureSpec};
use crate::units::dbm_to_watts;

pub use ase::{ase_from_ccdf, ase_from_noisy_ccdf, pdf_from_ccdf, AseIntegral};
pub use geometry::{association_density, association_mass, exclusion_radii, ExclusionRadii};
pub use interference::{interference_exponent, interference_laplace};
pub use rician::{
    characteristic_fn_inv_sinr, conditional_coverage_rician, log_interference_cf_direct,
    InvSinrKernel,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, AnalyticError>;

/// Everything the analytic engine needs besides the density and threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    /// Transmit power per base station (W).
    pub tx_power: f64,
    /// Noise power at the user (W). Zero gives the interference-limited case.
    pub noise_power: f64,
    pub model: PathLossModel,
    pub fading: FadingModel,
    pub quadrature: QuadratureSpec,
}

impl AnalysisConfig {
    /// 24 dBm transmit power, -95 dBm noise, Rayleigh fading.
    pub fn new(model: PathLossModel) -> Self {
        Self {
            tx_power: dbm_to_watts(24.0),
            noise_power: dbm_to_watts(-95.0),
            model,
            fading: FadingModel::rayleigh(),
            quadrature: QuadratureSpec::default(),
        }
    }

    pub fn with_fading(mut self, fading: FadingModel) -> Self {
        self.fading = fading;
        self
    }

    pub fn with_powers_dbm(mut self, tx_dbm: f64, noise_dbm: f64) -> Self {
        self.tx_power = dbm_to_watts(tx_dbm);
        self.noise_power = if noise_dbm == f64::NEG_INFINITY {
            0.0
        } else {
            dbm_to_watts(noise_dbm)
        };
        self
    }

    pub fn with_quadrature(mut self, quadrature: QuadratureSpec) -> Self {
        self.quadrature = quadrature;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tx_power > 0.0 && self.tx_power.is_finite()) {
            return Err(AnalyticError::InvalidInput(format!(
                "transmit power must be positive, got {}",
                self.tx_power
            )));
        }
        if !(self.noise_power >= 0.0 && self.noise_power.is_finite()) {
            return Err(AnalyticError::InvalidInput(format!(
                "noise power must be non-negative, got {}",
                self.noise_power
            )));
        }
        if !self.quadrature.is_valid() {
            return Err(AnalyticError::InvalidInput(
                "invalid quadrature tolerances".into(),
            ));
        }
        Ok(())
    }

    fn signal_fading(&self, path: PathType) -> Fading {
        self.fading.for_path(path)
    }
}

/// Contribution of one (segment, path type) pair to the coverage probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageTerm {
    pub segment: usize,
    pub path: PathType,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveragePoint {
    /// BS density (per km^2).
    pub lambda: f64,
    /// SINR threshold (linear).
    pub gamma: f64,
    pub p_cov: f64,
    pub terms: Vec<CoverageTerm>,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl CoveragePoint {
    pub fn term(&self, segment: usize, path: PathType) -> f64 {
        self.terms
            .iter()
            .find(|t| t.segment == segment && t.path == path)
            .map_or(0.0, |t| t.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsePoint {
    pub lambda: f64,
    /// Minimum working SINR (linear).
    pub gamma0: f64,
    /// bps/Hz/km^2.
    pub ase: f64,
    pub p_cov_at_gamma0: f64,
    pub gamma_max: f64,
    pub converged: bool,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(AnalyticError::InvalidInput(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

/// Signal-to-noise part of the conditional coverage: `s = gamma / (P zeta_n(w))`.
fn laplace_argument(cfg: &AnalysisConfig, n: usize, r: f64, path: PathType, gamma: f64) -> f64 {
    let w = cfg.model.distance_3d(r);
    gamma / (cfg.tx_power * cfg.model.segment_gain(n, w, path))
}

/// `Pr[SINR > gamma]` given a Rayleigh-faded serving link of type `path` at
/// 2D distance `r` in segment `n`. Interferers may use either fading law.
pub fn conditional_coverage_rayleigh(
    cfg: &AnalysisConfig,
    lambda: f64,
    r: f64,
    gamma: f64,
    n: usize,
    path: PathType,
) -> Result<f64> {
    let ex = exclusion_radii(&cfg.model, n, r, path)?;
    conditional_coverage_rayleigh_at(cfg, lambda, r, gamma, n, path, &ex)
}

pub(crate) fn conditional_coverage_rayleigh_at(
    cfg: &AnalysisConfig,
    lambda: f64,
    r: f64,
    gamma: f64,
    n: usize,
    path: PathType,
    ex: &ExclusionRadii,
) -> Result<f64> {
    if gamma == 0.0 {
        return Ok(1.0);
    }
    let s = laplace_argument(cfg, n, r, path, gamma);
    let noise = s * cfg.noise_power;
    if noise > 745.0 {
        return Ok(0.0);
    }
    let e = interference_exponent(cfg, lambda, ex, s)?;
    Ok((-(noise + e)).exp())
}

/// Conditional coverage with whatever fading the serving path uses:
/// the Laplace-transform route for Rayleigh, characteristic-function
/// inversion otherwise.
pub fn conditional_coverage(
    cfg: &AnalysisConfig,
    lambda: f64,
    r: f64,
    gamma: f64,
    n: usize,
    path: PathType,
) -> Result<f64> {
    match cfg.signal_fading(path) {
        Fading::Rayleigh => conditional_coverage_rayleigh(cfg, lambda, r, gamma, n, path),
        Fading::Rician { .. } => conditional_coverage_rician(cfg, lambda, r, gamma, n, path),
    }
}

/// Coverage probability at density `lambda` (per km^2) and SINR threshold `gamma` (linear).
pub fn coverage_probability(
    cfg: &AnalysisConfig,
    lambda: f64,
    gamma: f64,
) -> Result<CoveragePoint> {
    CoverageEngine::new(cfg, lambda)?.coverage(gamma)
}

/// Reusable per-density state: integration breakpoints and, for Rician
/// serving links, memoised interference characteristic functions.
pub struct CoverageEngine<'a> {
    cfg: &'a AnalysisConfig,
    lambda: f64,
    ranges: Vec<TermRange>,
    kernels: rician::KernelCache,
}

struct TermRange {
    n: usize,
    path: PathType,
    lo: f64,
    hi: f64,
    breaks: Vec<f64>,
}

impl<'a> CoverageEngine<'a> {
    pub fn new(cfg: &'a AnalysisConfig, lambda: f64) -> Result<Self> {
        cfg.validate()?;
        check_positive("lambda", lambda)?;
        let mut ranges = Vec::new();
        for n in 0..cfg.model.segment_count() {
            for path in [PathType::Los, PathType::Nlos] {
                if let Some((lo, hi, breaks)) = geometry::term_range(&cfg.model, lambda, n, path)? {
                    ranges.push(TermRange {
                        n,
                        path,
                        lo,
                        hi,
                        breaks,
                    });
                }
            }
        }
        Ok(Self {
            cfg,
            lambda,
            ranges,
            kernels: rician::KernelCache::default(),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn conditional(
        &self,
        r: f64,
        gamma: f64,
        n: usize,
        path: PathType,
        ex: &ExclusionRadii,
    ) -> Result<f64> {
        match self.cfg.signal_fading(path) {
            Fading::Rayleigh => {
                conditional_coverage_rayleigh_at(self.cfg, self.lambda, r, gamma, n, path, ex)
            }
            Fading::Rician { .. } => {
                if gamma == 0.0 {
                    return Ok(1.0);
                }
                let kernel = self
                    .kernels
                    .get_or_build(self.cfg, self.lambda, r, n, path, ex)?;
                kernel.coverage(gamma, &self.cfg.quadrature)
            }
        }
    }

    /// Coverage probability with the per-term breakdown. `gamma = 0` yields
    /// the association masses, which sum to one.
    pub fn coverage(&self, gamma: f64) -> Result<CoveragePoint> {
        self.coverage_where(gamma, |_| true)
    }

    fn is_rician(&self, path: PathType) -> bool {
        matches!(self.cfg.signal_fading(path), Fading::Rician { .. })
    }

    fn outer_spec(&self, path: PathType) -> QuadratureSpec {
        if self.is_rician(path) {
            let q = rician::rician_outer(&self.cfg.quadrature);
            QuadratureSpec {
                rel_tol: q.outer_rel_tol,
                abs_tol: rician::inversion_spec(&q).abs_tol,
                ..q
            }
        } else {
            self.cfg.quadrature.outer()
        }
    }

    /// Coverage summed over the terms whose serving path type passes `include`.
    fn coverage_where(
        &self,
        gamma: f64,
        include: impl Fn(PathType) -> bool,
    ) -> Result<CoveragePoint> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(AnalyticError::InvalidInput(format!(
                "gamma must be non-negative, got {gamma}"
            )));
        }
        let model = &self.cfg.model;
        let mut terms = Vec::with_capacity(self.ranges.len());
        let mut total = 0.0;
        let mut error = 0.0;
        let mut evaluations = 0;
        let mut converged = true;
        for tr in self.ranges.iter().filter(|tr| include(tr.path)) {
            let mut failure: Option<AnalyticError> = None;
            let integrand = |r: f64| -> f64 {
                if failure.is_some() {
                    return 0.0;
                }
                let ex = geometry::exclusion_unchecked(model, tr.n, r, tr.path);
                let density = geometry::density_at(model, self.lambda, r, tr.path, &ex);
                if density == 0.0 {
                    return 0.0;
                }
                match self.conditional(r, gamma, tr.n, tr.path, &ex) {
                    Ok(c) => c * density,
                    Err(e) => {
                        failure = Some(e);
                        0.0
                    }
                }
            };
            let res = integrate_with_breaks(
                integrand,
                tr.lo,
                tr.hi,
                &tr.breaks,
                &self.outer_spec(tr.path),
            )?;
            if let Some(e) = failure {
                return Err(e);
            }
            let value = res.value.max(0.0);
            terms.push(CoverageTerm {
                segment: tr.n,
                path: tr.path,
                value,
            });
            total += value;
            error += res.error_estimate;
            evaluations += res.evaluations;
            converged &= res.converged;
        }
        Ok(CoveragePoint {
            lambda: self.lambda,
            gamma,
            p_cov: total.min(1.0),
            terms,
            error_estimate: error,
            evaluations,
            converged,
        })
    }

    /// Rician-served part of the ASE, per unit density, with the threshold
    /// integral taken inside the serving-distance integral so each serving
    /// link's characteristic function is built once.
    fn rician_ase(&self, gamma0: f64) -> Result<AseIntegral> {
        let model = &self.cfg.model;
        let mut out = AseIntegral {
            ase: 0.0,
            p_at_gamma0: 0.0,
            gamma_max: gamma0,
            converged: true,
        };
        for tr in self.ranges.iter().filter(|tr| self.is_rician(tr.path)) {
            let mut failure: Option<AnalyticError> = None;
            let mut gamma_max = gamma0;
            let mut converged = true;
            let integrand = |r: f64| -> Complex64 {
                let zero = Complex64::new(0.0, 0.0);
                if failure.is_some() {
                    return zero;
                }
                let ex = geometry::exclusion_unchecked(model, tr.n, r, tr.path);
                let density = geometry::density_at(model, self.lambda, r, tr.path, &ex);
                if density == 0.0 {
                    return zero;
                }
                let res =
                    rician::InvSinrKernel::build(self.cfg, self.lambda, r, tr.n, tr.path, &ex)
                        .and_then(|k| k.conditional_ase(gamma0, &self.cfg.quadrature));
                match res {
                    Ok(a) => {
                        gamma_max = gamma_max.max(a.gamma_max);
                        converged &= a.converged;
                        Complex64::new(a.ase, a.p_at_gamma0) * density
                    }
                    Err(e) => {
                        failure = Some(e);
                        zero
                    }
                }
            };
            let res = integrate_with_breaks(
                integrand,
                tr.lo,
                tr.hi,
                &tr.breaks,
                &self.outer_spec(tr.path),
            )?;
            if let Some(e) = failure {
                return Err(e);
            }
            out.ase += res.value.re.max(0.0);
            out.p_at_gamma0 += res.value.im.max(0.0);
            out.gamma_max = out.gamma_max.max(gamma_max);
            out.converged &= converged && res.converged;
        }
        Ok(out)
    }
}

/// ASE in bps/Hz/km^2 at density `lambda` and minimum working SINR `gamma0` (linear).
pub fn area_spectral_efficiency(
    cfg: &AnalysisConfig,
    lambda: f64,
    gamma0: f64,
) -> Result<AsePoint> {
    check_positive("gamma0", gamma0)?;
    let engine = CoverageEngine::new(cfg, lambda)?;
    let mut failure: Option<AnalyticError> = None;
    let mut converged = true;
    let rayleigh = |path| !engine.is_rician(path);
    let ccdf = |g: f64| -> f64 {
        if failure.is_some() {
            return 0.0;
        }
        match engine.coverage_where(g, rayleigh) {
            Ok(p) => {
                converged &= p.converged;
                p.p_cov
            }
            Err(e) => {
                failure = Some(e);
                0.0
            }
        }
    };
    let res = ase_from_ccdf(lambda, gamma0, ccdf, &cfg.quadrature.ase())?;
    if let Some(e) = failure {
        return Err(e);
    }
    let rician = engine.rician_ase(gamma0)?;
    Ok(AsePoint {
        lambda,
        gamma0,
        ase: res.ase + lambda * rician.ase,
        p_cov_at_gamma0: res.p_at_gamma0 + rician.p_at_gamma0,
        gamma_max: res.gamma_max.max(rician.gamma_max),
        converged: converged && res.converged && rician.converged,
    })
}

/// SINR density `-d p_cov / d gamma` by a central difference in `ln gamma`.
pub fn sinr_pdf(cfg: &AnalysisConfig, lambda: f64, gamma: f64) -> Result<f64> {
    check_positive("gamma", gamma)?;
    let engine = CoverageEngine::new(cfg, lambda)?;
    let mut failure = None;
    let pdf = pdf_from_ccdf(
        |g| match engine.coverage(g) {
            Ok(p) => p.p_cov,
            Err(e) => {
                failure = Some(e);
                0.0
            }
        },
        gamma,
        1e-3,
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(pdf),
    }
}
