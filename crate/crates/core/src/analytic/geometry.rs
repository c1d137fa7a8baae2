//! Serving-distance densities and the exclusion radii shared with the
//! interference integrals.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{check_positive, AnalysisConfig, AnalyticError, Result};
use crate::channel::{ChannelError, PathLossModel, PathType};
use crate::quadrature::integrate_with_breaks;

/// Survival exponent at which the outer integral is truncated (`e^-35 ~ 6e-16`).
const SURVIVAL_CUTOFF: f64 = 35.0;

/// 2D radii inside which no interferer of the given type can exist, given
/// the serving link. For a LoS signal these are `(r, r1)`, for NLoS `(r2, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExclusionRadii {
    pub los: f64,
    pub nlos: f64,
}

impl ExclusionRadii {
    pub fn for_path(&self, path: PathType) -> f64 {
        match path {
            PathType::Los => self.los,
            PathType::Nlos => self.nlos,
        }
    }
}

pub fn exclusion_radii(
    model: &PathLossModel,
    n: usize,
    r: f64,
    path: PathType,
) -> Result<ExclusionRadii> {
    let cross = model.equal_gain_radius(n, r, path)?;
    Ok(make(r, cross, path))
}

pub(crate) fn exclusion_unchecked(
    model: &PathLossModel,
    n: usize,
    r: f64,
    path: PathType,
) -> ExclusionRadii {
    make(r, model.equal_gain_radius_unchecked(n, r, path), path)
}

fn make(r: f64, cross: f64, path: PathType) -> ExclusionRadii {
    match path {
        PathType::Los => ExclusionRadii {
            los: r,
            nlos: cross,
        },
        PathType::Nlos => ExclusionRadii {
            los: cross,
            nlos: r,
        },
    }
}

pub(crate) fn density_at(
    model: &PathLossModel,
    lambda: f64,
    r: f64,
    path: PathType,
    ex: &ExclusionRadii,
) -> f64 {
    let p = model.path_probability(model.distance_3d(r), path);
    if p == 0.0 || r == 0.0 {
        return 0.0;
    }
    let void = lambda * (model.los_mass(ex.los) + model.nlos_mass(ex.nlos));
    (-void).exp() * p * 2.0 * PI * lambda * r
}

/// Density of the serving distance `r` restricted to a serving link of type
/// `path` in segment `n`.
pub fn association_density(
    cfg: &AnalysisConfig,
    lambda: f64,
    n: usize,
    r: f64,
    path: PathType,
) -> Result<f64> {
    check_positive("lambda", lambda)?;
    let ex = exclusion_radii(&cfg.model, n, r, path)?;
    Ok(density_at(&cfg.model, lambda, r, path, &ex))
}

/// Probability that the serving link is of type `path` and lies in segment `n`.
pub fn association_mass(
    cfg: &AnalysisConfig,
    lambda: f64,
    n: usize,
    path: PathType,
) -> Result<f64> {
    check_positive("lambda", lambda)?;
    let Some((lo, hi, breaks)) = term_range(&cfg.model, lambda, n, path)? else {
        return Ok(0.0);
    };
    let model = &cfg.model;
    let res = integrate_with_breaks(
        |r| {
            let ex = exclusion_unchecked(model, n, r, path);
            density_at(model, lambda, r, path, &ex)
        },
        lo,
        hi,
        &breaks,
        &cfg.quadrature.outer(),
    )?;
    Ok(res.value)
}

/// Integration range and breakpoints of the `(n, path)` coverage term, or
/// `None` if a link of that type never occurs in the segment.
pub(crate) fn term_range(
    model: &PathLossModel,
    lambda: f64,
    n: usize,
    path: PathType,
) -> Result<Option<(f64, f64, Vec<f64>)>> {
    let seg = model.segments().get(n).ok_or(ChannelError::NoSuchSegment {
        n,
        count: model.segment_count(),
    })?;
    let probe = |w: f64| model.path_probability(w, path);
    match path {
        PathType::Los => {
            if let Some(end) = model.los_probability_fn().support_end() {
                if end <= seg.d_lo {
                    return Ok(None);
                }
            }
        }
        PathType::Nlos => {
            // A NLoS serving link needs some NLoS probability inside the segment.
            let hi = if seg.d_hi.is_finite() {
                seg.d_hi
            } else {
                seg.d_lo.max(1.0) * 1e3
            };
            let any = (0..=64).any(|i| probe(seg.d_lo + (hi - seg.d_lo) * i as f64 / 64.0) > 0.0);
            if !any {
                return Ok(None);
            }
        }
    }
    let (lo, seg_hi) = model.segment_radial_range(n)?;
    let rho = 1.0 / (PI * lambda).sqrt();

    let survival = |r: f64| {
        let ex = exclusion_unchecked(model, n, r, path);
        lambda * (model.los_mass(ex.los) + model.nlos_mass(ex.nlos))
    };
    let mut hi = rho.max(lo * 2.0).max(1e-9);
    let mut guard = 0;
    while hi < seg_hi && survival(hi) < SURVIVAL_CUTOFF {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(AnalyticError::InvalidInput(format!(
                "serving-distance density does not decay for segment {n} ({path:?})"
            )));
        }
    }
    let hi = hi.min(seg_hi);
    if !(hi > lo) {
        return Ok(None);
    }

    let mut breaks: Vec<f64> = model
        .breakpoints()
        .iter()
        .map(|&d| model.radial_distance(d))
        .collect();
    // Kinks where the cross-type exclusion radius leaves zero or crosses a breakpoint.
    let other = path.other();
    let mut anchors = vec![model.min_distance()];
    anchors.extend(model.breakpoints());
    for d in anchors {
        let target = model.gain(d, other);
        let r = model.radius_for_gain(target, path);
        if r.is_finite() {
            breaks.push(r);
        }
    }
    for k in -3..=3 {
        breaks.push(rho * 2f64.powi(k));
    }
    breaks.retain(|&b| b > lo && b < hi && b.is_finite());
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    Ok(Some((lo, hi, breaks)))
}
