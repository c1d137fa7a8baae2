//! Multi-path fading power distributions.
//!
//! Both variants are normalised to unit mean power. Rician fading with factor
//! `K` is the non-central chi-squared (two degrees of freedom) law scaled so
//! that `E[h] = 1`; `K = 0` collapses to Rayleigh (unit-mean exponential).

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::PathType;
use crate::quadrature::{integrate_finite, integrate_semi_infinite_with, QuadratureSpec, TailMap};
use crate::units::db_to_linear;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FadingError {
    #[error("fading power must be non-negative, got {0}")]
    NegativePower(f64),
    #[error("Rician K factor must be finite and non-negative, got {0}")]
    InvalidK(f64),
}

/// Distribution of the power gain of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fading {
    Rayleigh,
    /// `k` is the linear ratio of direct-path to scattered power.
    Rician {
        k: f64,
    },
}

impl Fading {
    pub fn rician(k: f64) -> Result<Self, FadingError> {
        if k.is_finite() && k >= 0.0 {
            Ok(Fading::Rician { k })
        } else {
            Err(FadingError::InvalidK(k))
        }
    }

    pub fn rician_db(k_db: f64) -> Result<Self, FadingError> {
        Self::rician(db_to_linear(k_db))
    }

    pub fn is_rayleigh(&self) -> bool {
        matches!(self, Fading::Rayleigh)
    }

    pub fn pdf(&self, x: f64) -> Result<f64, FadingError> {
        if x < 0.0 || x.is_nan() {
            return Err(FadingError::NegativePower(x));
        }
        Ok(match *self {
            Fading::Rayleigh => (-x).exp(),
            Fading::Rician { k } => {
                let z = 2.0 * (k * (k + 1.0) * x).sqrt();
                // exp(-K - (K+1)x) I0(z) = exp(-K - (K+1)x + z) I0e(z)
                (k + 1.0) * (-k - (k + 1.0) * x + z).exp() * bessel_i0e(z)
            }
        })
    }

    /// `Pr[h > x]`.
    pub fn ccdf(&self, x: f64) -> Result<f64, FadingError> {
        if x < 0.0 || x.is_nan() {
            return Err(FadingError::NegativePower(x));
        }
        match *self {
            Fading::Rayleigh => Ok((-x).exp()),
            Fading::Rician { k } => {
                let spec = QuadratureSpec::with_tolerances(1e-12, 1e-15);
                let pdf = |t: f64| self.pdf(t).unwrap_or(0.0);
                // Integrate whichever side of the bulk is shorter.
                if x <= 1.0 {
                    let head = integrate_finite(pdf, 0.0, x, &spec)
                        .map(|r| r.value)
                        .unwrap_or(0.0);
                    Ok((1.0 - head).clamp(0.0, 1.0))
                } else {
                    let scale = 1.0 / (k + 1.0).sqrt();
                    let tail =
                        integrate_semi_infinite_with(pdf, x, TailMap::Exponential { scale }, &spec)
                            .map(|r| r.value)
                            .unwrap_or(0.0);
                    Ok(tail.clamp(0.0, 1.0))
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> Result<f64, FadingError> {
        self.ccdf(x).map(|c| 1.0 - c)
    }

    /// Characteristic function `E[exp(j t h)]`.
    pub fn characteristic(&self, t: f64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        match *self {
            Fading::Rayleigh => one / Complex64::new(1.0, -t),
            Fading::Rician { k } => {
                let denom = Complex64::new(k + 1.0, -t);
                let phase = Complex64::new(0.0, k * t) / denom;
                (k + 1.0) / denom * phase.exp()
            }
        }
    }

    /// Laplace transform `E[exp(-s h)]` for `s >= 0`.
    pub fn laplace(&self, s: f64) -> f64 {
        match *self {
            Fading::Rayleigh => 1.0 / (1.0 + s),
            Fading::Rician { k } => {
                let d = k + 1.0 + s;
                (k + 1.0) / d * (-k * s / d).exp()
            }
        }
    }

    /// `1 - E[exp(-s h)]`, accurate for small `s`.
    pub fn laplace_complement(&self, s: f64) -> f64 {
        match *self {
            Fading::Rayleigh => s / (1.0 + s),
            Fading::Rician { k } => {
                let d = k + 1.0 + s;
                -(-k * s / d + (-s / d).ln_1p()).exp_m1()
            }
        }
    }

    /// `1 - E[exp(j t h)]`, accurate for small `t`.
    pub fn characteristic_complement(&self, t: f64) -> Complex64 {
        match *self {
            Fading::Rayleigh => {
                let jt = Complex64::new(0.0, t);
                -jt / (1.0 - jt)
            }
            Fading::Rician { k } => {
                let denom = Complex64::new(k + 1.0, -t);
                let log_phi = Complex64::new(0.0, k * t) / denom - (denom / (k + 1.0)).ln();
                -complex_exp_m1(log_phi)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Fading::Rayleigh => Exp1.sample(rng),
            Fading::Rician { k } => {
                let los = (k / (k + 1.0)).sqrt();
                let sigma = (2.0 * (k + 1.0)).sqrt().recip();
                let n1: f64 = StandardNormal.sample(rng);
                let n2: f64 = StandardNormal.sample(rng);
                let re = los + sigma * n1;
                let im = sigma * n2;
                re * re + im * im
            }
        }
    }
}

/// Fading assignment per propagation state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FadingSpec", into = "FadingSpec")]
pub struct FadingModel {
    pub los: Fading,
    pub nlos: Fading,
}

impl FadingModel {
    pub fn rayleigh() -> Self {
        Self {
            los: Fading::Rayleigh,
            nlos: Fading::Rayleigh,
        }
    }

    /// Rician LoS links, Rayleigh NLoS links.
    pub fn rician_los(k: f64) -> Result<Self, FadingError> {
        Ok(Self {
            los: Fading::rician(k)?,
            nlos: Fading::Rayleigh,
        })
    }

    pub fn is_all_rayleigh(&self) -> bool {
        self.los.is_rayleigh() && self.nlos.is_rayleigh()
    }
}

impl FadingModel {
    pub fn for_path(&self, path: PathType) -> Fading {
        match path {
            PathType::Los => self.los,
            PathType::Nlos => self.nlos,
        }
    }
}

impl Default for FadingModel {
    fn default() -> Self {
        Self::rayleigh()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FadingKind {
    Rayleigh,
    Rician,
}

/// JSON form: `{"los": "rician", "k_db": 10, "nlos": "rayleigh"}`. A linear
/// `"k"` takes precedence over `"k_db"`; the default is K = 10 dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FadingSpec {
    pub los: FadingKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    pub nlos: FadingKind,
}

impl TryFrom<FadingSpec> for FadingModel {
    type Error = FadingError;

    fn try_from(spec: FadingSpec) -> Result<Self, Self::Error> {
        let pick = |kind| match kind {
            FadingKind::Rayleigh => Ok(Fading::Rayleigh),
            FadingKind::Rician => match spec.k {
                Some(k) => Fading::rician(k),
                None => Fading::rician_db(spec.k_db.unwrap_or(10.0)),
            },
        };
        Ok(Self {
            los: pick(spec.los)?,
            nlos: pick(spec.nlos)?,
        })
    }
}

impl From<FadingModel> for FadingSpec {
    fn from(m: FadingModel) -> Self {
        let kind = |f: Fading| match f {
            Fading::Rayleigh => FadingKind::Rayleigh,
            Fading::Rician { .. } => FadingKind::Rician,
        };
        let k = [m.los, m.nlos].iter().find_map(|f| match f {
            Fading::Rician { k } => Some(*k),
            Fading::Rayleigh => None,
        });
        FadingSpec {
            los: kind(m.los),
            k_db: None,
            k,
            nlos: kind(m.nlos),
        }
    }
}

fn complex_exp_m1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        z * (1.0 + z * (0.5 + z / 6.0))
    } else {
        z.exp() - 1.0
    }
}

const I0_SERIES_LIMIT: f64 = 15.0;

/// Modified Bessel function of the first kind, order zero.
///
/// Overflows to `inf` beyond z ~ 713; use [`bessel_i0e`] there.
pub fn bessel_i0(z: f64) -> f64 {
    let z = z.abs();
    if z < I0_SERIES_LIMIT {
        i0_series(z)
    } else if z > 700.0 {
        f64::INFINITY
    } else {
        bessel_i0e(z) * z.exp()
    }
}

/// Exponentially scaled `I0(z) * exp(-|z|)`.
pub fn bessel_i0e(z: f64) -> f64 {
    let z = z.abs();
    if z < I0_SERIES_LIMIT {
        return i0_series(z) * (-z).exp();
    }
    // Hankel expansion: I0(z) ~ e^z / sqrt(2 pi z) * sum ((2k-1)!!)^2 / (k! (8z)^k)
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        let next = term * (2.0 * kf - 1.0).powi(2) / (8.0 * kf * z);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * z).sqrt()
}

fn i0_series(z: f64) -> f64 {
    let q = 0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}
