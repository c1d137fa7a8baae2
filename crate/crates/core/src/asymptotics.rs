//! Closed-form crash diagnostics: the two-BS SIR, the conditional coverage
//! bound, and regime classification of a density sweep.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::AsePoint;

#[derive(Debug, Error, PartialEq)]
pub enum RegimeError {
    #[error("need at least {min} sweep points, got {got}")]
    TooFewPoints { min: usize, got: usize },
    #[error("sweep densities must be positive and strictly increasing (index {index})")]
    Unsorted { index: usize },
}

/// SIR of a UE served by a BS at 2D distance `r` while one interferer sits at
/// `tau * r`, both LoS in the first segment with exponent `alpha`, no fading.
pub fn pairwise_sir(r: f64, tau: f64, l: f64, alpha: f64) -> f64 {
    let num = r * r + l * l;
    let den = tau * tau * r * r + l * l;
    if den == 0.0 {
        // r = L = 0: the L = 0 identity holds for every r > 0, take the limit.
        return tau.powf(alpha);
    }
    (num / den).powf(-alpha / 2.0)
}

/// Upper bound on conditional coverage: `exp(-Pr^L(L) (tau^2 - 1) / (1 + 1/gamma))`.
pub fn kappa_bound(prl_at_l: f64, gamma: f64, tau: f64) -> f64 {
    (-prl_at_l * (tau * tau - 1.0) / (1.0 + 1.0 / gamma)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegimeThresholds {
    /// Log-log ASE slope below which growth counts as a crawl.
    pub crawl_slope: f64,
    /// Fraction of the peak ASE marking the crash onset.
    pub crash_fraction: f64,
    /// Absolute ASE (bps/Hz/km^2) marking collapse.
    pub collapse_ase: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self {
            crawl_slope: 0.5,
            crash_fraction: 0.5,
            collapse_ase: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrashDiagnostics {
    /// Maximal run of sub-threshold log-log slope starting below the peak.
    pub crawl_interval: Option<(f64, f64)>,
    /// First density past the peak with ASE below `crash_fraction * peak`.
    pub crash_onset: Option<f64>,
    pub peak_lambda: f64,
    pub peak_ase: f64,
    /// The peak sits on the first or last grid point.
    pub peak_at_boundary: bool,
    /// First density past the peak with ASE below `collapse_ase`.
    pub collapse_lambda: Option<f64>,
}

pub const MIN_SWEEP_POINTS: usize = 5;

pub fn classify_regimes(
    sweep: &[AsePoint],
    th: &RegimeThresholds,
) -> Result<CrashDiagnostics, RegimeError> {
    let lambdas: Vec<f64> = sweep.iter().map(|p| p.lambda).collect();
    let ases: Vec<f64> = sweep.iter().map(|p| p.ase).collect();
    classify_curve(&lambdas, &ases, th)
}

/// [`classify_regimes`] on plain `(lambda, ase)` columns.
pub fn classify_curve(
    lambdas: &[f64],
    ases: &[f64],
    th: &RegimeThresholds,
) -> Result<CrashDiagnostics, RegimeError> {
    let n = lambdas.len().min(ases.len());
    if n < MIN_SWEEP_POINTS {
        return Err(RegimeError::TooFewPoints {
            min: MIN_SWEEP_POINTS,
            got: n,
        });
    }
    for i in 0..n {
        let bad = !(lambdas[i] > 0.0) || (i > 0 && !(lambdas[i] > lambdas[i - 1]));
        if bad {
            return Err(RegimeError::Unsorted { index: i });
        }
    }
    let (peak, &peak_ase) =
        ases[..n].iter().enumerate().fold(
            (0, &ases[0]),
            |best, (i, a)| if *a > *best.1 { (i, a) } else { best },
        );

    let slope = |i: usize| -> f64 {
        let (a, b) = (ases[i], ases[i + 1]);
        if a > 0.0 && b > 0.0 {
            (b / a).ln() / (lambdas[i + 1] / lambdas[i]).ln()
        } else if b > a {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    };
    // The run must start below the peak but may run on into the crash.
    let crawl = (0..peak).find(|&i| slope(i) < th.crawl_slope).map(|start| {
        let end = (start..n - 1)
            .find(|&i| slope(i) >= th.crawl_slope)
            .unwrap_or(n - 1);
        (lambdas[start], lambdas[end])
    });
    let after = |limit: f64| (peak + 1..n).find(|&j| ases[j] < limit).map(|j| lambdas[j]);
    Ok(CrashDiagnostics {
        crawl_interval: crawl,
        crash_onset: after(th.crash_fraction * peak_ase),
        peak_lambda: lambdas[peak],
        peak_ase,
        peak_at_boundary: peak == 0 || peak == n - 1,
        collapse_lambda: after(th.collapse_ase),
    })
}
