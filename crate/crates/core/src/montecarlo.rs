//! HPPP snapshot simulator. Each trial draws from its own ChaCha stream keyed
//! by `(seed, trial)`, and trials are reduced in fixed-size chunks in index
//! order, so estimates do not depend on the number of workers.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};
use thiserror::Error;

use crate::analytic::AnalysisConfig;
use crate::antenna::{self, AntennaSpec};
use crate::channel::PathType;
use crate::fading::Fading;
use crate::par;
use crate::quadrature::{integrate_finite, QuadError, QuadratureSpec};
use crate::units::db_to_linear;

pub const MIN_TRIALS: u64 = 1000;
/// Trials per reduction chunk.
const CHUNK: u64 = 256;
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error(transparent)]
    Antenna(#[from] antenna::AntennaError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// How a trial contributes to the estimates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Draws every fading gain and counts `SINR > gamma`.
    #[default]
    Indicator,
    /// Draws the layout only and averages Rayleigh fading in closed form.
    /// Resolves coverage far below `1 / trials`; needs Rayleigh fading on
    /// both path types.
    FadingAveraged,
}

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub analysis: AnalysisConfig,
    /// BS density (BSs/km^2).
    pub lambda: f64,
    pub antenna: Option<AntennaSpec>,
    /// Disc radius (km); `None` applies [`default_radius`].
    pub sim_radius: Option<f64>,
    pub trials: u64,
    pub seed: u64,
    pub min_expected_bs: f64,
    /// Rate cap (linear SINR) applied to the ASE estimator.
    pub gamma_cap: f64,
    pub estimator: Estimator,
}

impl SimConfig {
    pub fn new(analysis: AnalysisConfig, lambda: f64) -> Self {
        Self {
            analysis,
            lambda,
            antenna: None,
            sim_radius: None,
            trials: 10_000,
            seed: 1,
            min_expected_bs: 100.0,
            gamma_cap: db_to_linear(60.0),
            estimator: Estimator::Indicator,
        }
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_antenna(mut self, antenna: Option<AntennaSpec>) -> Self {
        self.antenna = antenna;
        self
    }

    pub fn with_radius(mut self, radius: Option<f64>) -> Self {
        self.sim_radius = radius;
        self
    }

    pub fn with_estimator(mut self, estimator: Estimator) -> Self {
        self.estimator = estimator;
        self
    }

    pub fn radius(&self) -> f64 {
        self.sim_radius.unwrap_or_else(|| {
            default_radius(
                self.analysis
                    .model
                    .los_probability_fn()
                    .transition_distance(),
                self.lambda,
            )
        })
    }

    pub fn expected_bs(&self) -> f64 {
        let r = self.radius();
        self.lambda * PI * r * r
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(SimError::InvalidParameter { name, reason });
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad("lambda", format!("must be positive, got {}", self.lambda));
        }
        if let Some(r) = self.sim_radius {
            if !(r > 0.0 && r.is_finite()) {
                return bad("sim_radius", format!("must be positive, got {r}"));
            }
        }
        if self.trials < MIN_TRIALS {
            return bad(
                "trials",
                format!("need at least {MIN_TRIALS}, got {}", self.trials),
            );
        }
        if self.expected_bs() < self.min_expected_bs {
            return bad(
                "sim_radius",
                format!(
                    "expected {:.1} BSs in the disc, need at least {}",
                    self.expected_bs(),
                    self.min_expected_bs
                ),
            );
        }
        if !(self.gamma_cap > 0.0) {
            return bad(
                "gamma_cap",
                format!("must be positive, got {}", self.gamma_cap),
            );
        }
        if self.estimator == Estimator::FadingAveraged && !self.analysis.fading.is_all_rayleigh() {
            return bad(
                "estimator",
                "fading averaging needs Rayleigh fading on both paths".into(),
            );
        }
        if let Some(a) = &self.antenna {
            a.validate()?;
        }
        self.analysis
            .validate()
            .map_err(|e| SimError::InvalidParameter {
                name: "analysis",
                reason: e.to_string(),
            })
    }
}

/// `max(5 d1, 20 / sqrt(lambda pi))`: covers the LoS transition and holds
/// about 400 BSs on average.
pub fn default_radius(transition: f64, lambda: f64) -> f64 {
    (5.0 * transition).max(20.0 / (lambda * PI).sqrt())
}

/// Random stream of one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// BS layout of one trial: 2D distances to the UE at the origin and LoS flags.
/// Only distances enter the link budget, so angles are not drawn.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NetworkSample {
    pub radii: Vec<f64>,
    pub los: Vec<bool>,
    /// Draws of an empty disc that were discarded.
    pub resampled_empty: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub radii: Vec<f64>,
    pub los: Vec<bool>,
    /// Fading-free, antenna-weighted gain of every link.
    pub link_gains: Vec<f64>,
    pub serving_index: usize,
    /// `+inf` when neither interference nor noise is present.
    pub sinr: f64,
}

/// Per-run constants shared by every trial.
struct Context<'a> {
    cfg: &'a SimConfig,
    radius: f64,
    poisson: Poisson<f64>,
    tilt: Option<(AntennaSpec, f64)>,
    fading_los: Fading,
    fading_nlos: Fading,
}

impl<'a> Context<'a> {
    fn new(cfg: &'a SimConfig) -> Result<Self> {
        cfg.validate()?;
        let radius = cfg.radius();
        let poisson = Poisson::new(cfg.expected_bs()).map_err(|e| SimError::InvalidParameter {
            name: "lambda",
            reason: e.to_string(),
        })?;
        let l = cfg.analysis.model.height_diff();
        Ok(Self {
            cfg,
            radius,
            poisson,
            tilt: cfg
                .antenna
                .map(|a| (a, antenna::downtilt_for_density(cfg.lambda, l, &a))),
            fading_los: cfg.analysis.fading.for_path(PathType::Los),
            fading_nlos: cfg.analysis.fading.for_path(PathType::Nlos),
        })
    }

    fn sample_into<R: Rng>(&self, rng: &mut R, out: &mut NetworkSample) {
        let model = &self.cfg.analysis.model;
        let l = model.height_diff();
        out.radii.clear();
        out.los.clear();
        out.resampled_empty = 0;
        let n = loop {
            let n = self.poisson.sample(rng) as usize;
            if n > 0 {
                break n;
            }
            out.resampled_empty += 1;
        };
        for _ in 0..n {
            let u: f64 = rng.random();
            let r = self.radius * u.sqrt();
            let p = model.los_probability((r * r + l * l).sqrt());
            let los = if p >= 1.0 {
                true
            } else if p <= 0.0 {
                false
            } else {
                rng.random::<f64>() < p
            };
            out.radii.push(r);
            out.los.push(los);
        }
    }

    fn link_gain(&self, r: f64, los: bool) -> f64 {
        let model = &self.cfg.analysis.model;
        let l = model.height_diff();
        let path = if los { PathType::Los } else { PathType::Nlos };
        let g = model.gain((r * r + l * l).sqrt(), path);
        match &self.tilt {
            Some((spec, tilt)) => g * antenna::link_gain(r, l, *tilt, spec),
            None => g,
        }
    }

    /// Fills `gains`, returns the serving index.
    fn gains_into(&self, sample: &NetworkSample, gains: &mut Vec<f64>) -> usize {
        gains.clear();
        let mut best = 0;
        let mut best_gain = f64::NEG_INFINITY;
        for (i, (&r, &los)) in sample.radii.iter().zip(&sample.los).enumerate() {
            let g = self.link_gain(r, los);
            if g > best_gain {
                best_gain = g;
                best = i;
            }
            gains.push(g);
        }
        best
    }

    /// Fills `gains`, returns `(serving index, sinr)`.
    fn sinr_into<R: Rng>(
        &self,
        sample: &NetworkSample,
        rng: &mut R,
        gains: &mut Vec<f64>,
    ) -> (usize, f64) {
        let best = self.gains_into(sample, gains);
        let p = self.cfg.analysis.tx_power;
        let mut signal = 0.0;
        let mut interference = 0.0;
        for (i, (&g, &los)) in gains.iter().zip(&sample.los).enumerate() {
            let fading = if los {
                self.fading_los
            } else {
                self.fading_nlos
            };
            let rx = p * g * fading.sample(rng);
            if i == best {
                signal = rx;
            } else {
                interference += rx;
            }
        }
        let denom = interference + self.cfg.analysis.noise_power;
        let sinr = if denom > 0.0 {
            signal / denom
        } else {
            f64::INFINITY
        };
        (best, sinr)
    }
}

/// `ln P[SINR > t | layout]` with Rayleigh fading everywhere. Interferers
/// enter through their gains relative to the serving link; those in `near`
/// exactly, the rest through the first two power sums of a `ln(1 + y)`
/// expansion.
struct LayoutCcdf {
    nu: f64,
    near: Vec<f64>,
    far1: f64,
    far2: f64,
}

impl LayoutCcdf {
    fn ln_ccdf(&self, t: f64) -> f64 {
        let near: f64 = self.near.iter().map(|&x| (t * x).ln_1p()).sum();
        -t * self.nu - near - t * self.far1 + 0.5 * t * t * self.far2
    }
}

/// Drop of `ln P[SINR > t]` below its value at `gamma0` where the rate
/// integral is truncated.
const TAIL_LN: f64 = 30.0;

impl Context<'_> {
    /// Fading-averaged coverage at each threshold and rate of one layout.
    fn averaged_into(
        &self,
        sample: &NetworkSample,
        gains: &mut Vec<f64>,
        thresholds: &[f64],
        gamma0: f64,
        coverage: &mut [f64],
    ) -> Result<f64> {
        let best = self.gains_into(sample, gains);
        let g0 = gains[best];
        let mut exact = LayoutCcdf {
            nu: self.cfg.analysis.noise_power / (self.cfg.analysis.tx_power * g0),
            near: Vec::with_capacity(gains.len()),
            far1: 0.0,
            far2: 0.0,
        };
        exact.near.extend(
            gains
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != best)
                .map(|(_, &g)| g / g0),
        );
        for (c, &g) in coverage.iter_mut().zip(thresholds) {
            *c = exact.ln_ccdf(g).exp();
        }

        let cap = self.cfg.gamma_cap;
        let ln_c0 = exact.ln_ccdf(gamma0);
        let head = (1.0 + gamma0.min(cap)).log2() * ln_c0.exp();
        if gamma0 >= cap {
            return Ok(head);
        }
        let mut t_hi = gamma0.max(1e-2);
        while t_hi < cap && exact.ln_ccdf(t_hi) > ln_c0 - TAIL_LN {
            t_hi *= 4.0;
        }
        let t_hi = t_hi.min(cap);

        // Second-order aggregation of y = t x <= 1e-3 errs by at most y^3 / 3
        // per term, far below the integration tolerance.
        let delta = 1e-3 / t_hi;
        let (mut far1, mut far2) = (0.0, 0.0);
        exact.near.retain(|&x| {
            if x < delta {
                far1 += x;
                far2 += x * x;
                false
            } else {
                true
            }
        });
        let split = LayoutCcdf {
            far1,
            far2,
            ..exact
        };
        let spec = QuadratureSpec::with_tolerances(1e-7, f64::MIN_POSITIVE);
        let tail = integrate_finite(
            |v: f64| split.ln_ccdf(v.exp_m1()).exp(),
            gamma0.ln_1p(),
            t_hi.ln_1p(),
            &spec,
        )?;
        Ok(head + tail.value / std::f64::consts::LN_2)
    }
}

/// BS positions and LoS flags of trial `trial`.
pub fn sample_network(cfg: &SimConfig, trial: u64) -> Result<NetworkSample> {
    let ctx = Context::new(cfg)?;
    let mut out = NetworkSample::default();
    ctx.sample_into(&mut trial_rng(cfg.seed, trial), &mut out);
    Ok(out)
}

/// Associates the UE and assembles the SINR of a sampled layout. Fading is
/// drawn from `rng` after association.
pub fn snapshot_sinr<R: Rng>(
    cfg: &SimConfig,
    sample: &NetworkSample,
    rng: &mut R,
) -> Result<Snapshot> {
    if sample.radii.is_empty() {
        return Err(SimError::InvalidParameter {
            name: "sample",
            reason: "no BS in the disc".into(),
        });
    }
    let ctx = Context::new(cfg)?;
    let mut gains = Vec::with_capacity(sample.radii.len());
    let (serving_index, sinr) = ctx.sinr_into(sample, rng, &mut gains);
    Ok(Snapshot {
        radii: sample.radii.clone(),
        los: sample.los.clone(),
        link_gains: gains,
        serving_index,
        sinr,
    })
}

/// Full snapshot of trial `trial`, drawing layout then fading from one stream.
pub fn run_trial(cfg: &SimConfig, trial: u64) -> Result<Snapshot> {
    let ctx = Context::new(cfg)?;
    let mut rng = trial_rng(cfg.seed, trial);
    let mut sample = NetworkSample::default();
    ctx.sample_into(&mut rng, &mut sample);
    let mut gains = Vec::new();
    let (serving_index, sinr) = ctx.sinr_into(&sample, &mut rng, &mut gains);
    Ok(Snapshot {
        radii: sample.radii,
        los: sample.los,
        link_gains: gains,
        serving_index,
        sinr,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// 95% half-width: `1.96 * stderr`.
    pub ci_half_width: f64,
    /// Exact (Clopper-Pearson) 95% bounds for proportions, normal bounds otherwise.
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: u64,
    pub seed: u64,
}

impl Estimate {
    pub fn proportion(successes: u64, trials: u64, seed: u64) -> Self {
        let n = trials as f64;
        let k = successes as f64;
        let p = k / n;
        let half = Z95 * (p * (1.0 - p) / n).sqrt();
        let alpha = 0.05;
        let ci_low = if successes == 0 {
            0.0
        } else {
            Beta::new(k, n - k + 1.0).map_or(0.0, |b| b.inverse_cdf(alpha / 2.0))
        };
        let ci_high = if successes == trials {
            1.0
        } else {
            Beta::new(k + 1.0, n - k).map_or(1.0, |b| b.inverse_cdf(1.0 - alpha / 2.0))
        };
        Self {
            mean: p,
            ci_half_width: half,
            ci_low,
            ci_high,
            trials,
            seed,
        }
    }

    pub fn sample_mean(sum: f64, sum_sq: f64, trials: u64, seed: u64) -> Self {
        let n = trials as f64;
        let mean = sum / n;
        let var = if trials > 1 {
            ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        let half = Z95 * (var / n).sqrt();
        Self {
            mean,
            ci_half_width: half,
            ci_low: mean - half,
            ci_high: mean + half,
            trials,
            seed,
        }
    }

    fn scaled(self, c: f64) -> Self {
        Self {
            mean: self.mean * c,
            ci_half_width: self.ci_half_width * c,
            ci_low: self.ci_low * c,
            ci_high: self.ci_high * c,
            ..self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub lambda: f64,
    pub radius_km: f64,
    pub trials: u64,
    pub seed: u64,
    /// `(gamma, P[SINR > gamma])` per requested threshold.
    pub coverage: Vec<(f64, Estimate)>,
    pub gamma0: f64,
    /// `lambda * E[log2(1 + min(SINR, cap)) 1{SINR > gamma0}]`.
    pub ase: Estimate,
    pub resampled_empty: u64,
    /// Trials whose SINR exceeded the rate cap.
    pub capped: u64,
    pub mean_bs: f64,
}

#[derive(Debug, Clone, Default)]
struct Tally {
    covered: Vec<u64>,
    cov_sum: Vec<f64>,
    cov_sq: Vec<f64>,
    rate_sum: f64,
    rate_sq: f64,
    capped: u64,
    empty: u64,
    bs: u64,
}

/// Runs every trial once and evaluates all thresholds and the ASE on the
/// same snapshots. With [`Estimator::FadingAveraged`] coverage carries a
/// normal interval and `capped` is not tracked.
pub fn simulate(cfg: &SimConfig, thresholds: &[f64], gamma0: f64) -> Result<SimSummary> {
    let ctx = Context::new(cfg)?;
    let chunks = cfg.trials.div_ceil(CHUNK);
    let cap_rate = (1.0 + cfg.gamma_cap).log2();
    let averaged = cfg.estimator == Estimator::FadingAveraged;
    let tallies = par::map_indexed(chunks as usize, |c| -> Result<Tally> {
        let mut t = Tally {
            covered: vec![0; thresholds.len()],
            cov_sum: vec![0.0; thresholds.len()],
            cov_sq: vec![0.0; thresholds.len()],
            ..Tally::default()
        };
        let mut sample = NetworkSample::default();
        let mut gains = Vec::new();
        let mut coverage = vec![0.0; thresholds.len()];
        let start = c as u64 * CHUNK;
        for trial in start..(start + CHUNK).min(cfg.trials) {
            let mut rng = trial_rng(cfg.seed, trial);
            ctx.sample_into(&mut rng, &mut sample);
            t.empty += u64::from(sample.resampled_empty);
            t.bs += sample.radii.len() as u64;
            let rate = if averaged {
                let rate =
                    ctx.averaged_into(&sample, &mut gains, thresholds, gamma0, &mut coverage)?;
                for (k, &p) in coverage.iter().enumerate() {
                    t.cov_sum[k] += p;
                    t.cov_sq[k] += p * p;
                }
                rate
            } else {
                let (_, sinr) = ctx.sinr_into(&sample, &mut rng, &mut gains);
                for (k, &g) in thresholds.iter().enumerate() {
                    if sinr > g {
                        t.covered[k] += 1;
                    }
                }
                if sinr <= gamma0 {
                    0.0
                } else if sinr > cfg.gamma_cap {
                    t.capped += 1;
                    cap_rate
                } else {
                    sinr.ln_1p() / std::f64::consts::LN_2
                }
            };
            t.rate_sum += rate;
            t.rate_sq += rate * rate;
        }
        Ok(t)
    });
    let mut total = Tally {
        covered: vec![0; thresholds.len()],
        cov_sum: vec![0.0; thresholds.len()],
        cov_sq: vec![0.0; thresholds.len()],
        ..Tally::default()
    };
    for t in tallies {
        let t = t?;
        for (a, b) in total.covered.iter_mut().zip(&t.covered) {
            *a += b;
        }
        for (a, b) in total.cov_sum.iter_mut().zip(&t.cov_sum) {
            *a += b;
        }
        for (a, b) in total.cov_sq.iter_mut().zip(&t.cov_sq) {
            *a += b;
        }
        total.rate_sum += t.rate_sum;
        total.rate_sq += t.rate_sq;
        total.capped += t.capped;
        total.empty += t.empty;
        total.bs += t.bs;
    }
    let n = cfg.trials;
    let coverage = thresholds
        .iter()
        .enumerate()
        .map(|(k, &g)| {
            let est = if averaged {
                Estimate::sample_mean(total.cov_sum[k], total.cov_sq[k], n, cfg.seed)
            } else {
                Estimate::proportion(total.covered[k], n, cfg.seed)
            };
            (g, est)
        })
        .collect();
    Ok(SimSummary {
        lambda: cfg.lambda,
        radius_km: ctx.radius,
        trials: n,
        seed: cfg.seed,
        coverage,
        gamma0,
        ase: Estimate::sample_mean(total.rate_sum, total.rate_sq, n, cfg.seed).scaled(cfg.lambda),
        resampled_empty: total.empty,
        capped: total.capped,
        mean_bs: total.bs as f64 / n as f64,
    })
}

/// `P[SINR > gamma]` with a binomial confidence interval.
pub fn estimate_coverage(cfg: &SimConfig, gamma: f64) -> Result<Estimate> {
    Ok(simulate(cfg, &[gamma], gamma)?.coverage[0].1)
}

/// ASE in bps/Hz/km^2 with a normal confidence interval.
pub fn estimate_ase(cfg: &SimConfig, gamma0: f64) -> Result<Estimate> {
    Ok(simulate(cfg, &[], gamma0)?.ase)
}
