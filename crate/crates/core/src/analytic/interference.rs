//! Campbell functionals of the interference field outside the exclusion radii.

use std::f64::consts::PI;

use super::{check_positive, exclusion_radii, AnalysisConfig, ExclusionRadii, Result};
use crate::channel::{PathLossModel, PathType};
use crate::quadrature::{
    integrate_semi_infinite_with, integrate_with_breaks, QuadValue, QuadratureSpec, TailMap,
};

/// `sum_path int_{w(ex.path)}^inf Pr_path(w) kernel(path, w) w dw`.
///
/// `knee(path)` is the 3D distance where the kernel changes from saturated
/// to decaying; it is used as an extra breakpoint.
pub(crate) fn campbell<T, K, N>(
    model: &PathLossModel,
    ex: &ExclusionRadii,
    kernel: K,
    knee: N,
    spec: &QuadratureSpec,
) -> Result<T>
where
    T: QuadValue,
    K: Fn(PathType, f64) -> T,
    N: Fn(PathType) -> Option<f64>,
{
    let mut total = T::zero();
    for path in [PathType::Los, PathType::Nlos] {
        let w_a = model.distance_3d(ex.for_path(path));
        let f = |w: f64| -> T {
            let p = model.path_probability(w, path);
            if p == 0.0 {
                T::zero()
            } else {
                kernel(path, w) * (p * w)
            }
        };
        let end = match path {
            PathType::Los => model.los_probability_fn().support_end(),
            PathType::Nlos => None,
        };
        if let Some(end) = end {
            if end <= w_a {
                continue;
            }
        }
        let mut points = model.breakpoints();
        if let Some(k) = knee(path) {
            points.push(k);
        }
        points.retain(|&p| p > w_a && p.is_finite() && end.is_none_or(|e| p < e));
        points.sort_by(f64::total_cmp);
        match end {
            Some(end) => {
                total = total + integrate_with_breaks(f, w_a, end, &points, spec)?.value;
            }
            None => {
                let last = points
                    .last()
                    .copied()
                    .unwrap_or(w_a)
                    .max(model.min_distance())
                    .max(1e-3);
                let head = if last > w_a {
                    integrate_with_breaks(&f, w_a, last, &points, spec)?.value
                } else {
                    T::zero()
                };
                let tail = integrate_semi_infinite_with(
                    &f,
                    last.max(w_a),
                    TailMap::Logarithmic { scale: 1.0 },
                    spec,
                )?
                .value;
                total = total + head + tail;
            }
        }
    }
    Ok(total)
}

/// 3D distance at which the `path` gain equals `target`, if inside the model's range.
pub(crate) fn knee_distance(model: &PathLossModel, target: f64, path: PathType) -> Option<f64> {
    let r = model.radius_for_gain(target, path);
    (r > 0.0 && r.is_finite()).then(|| model.distance_3d(r))
}

/// `-ln E[exp(-s I)]` for interference power `I` (W) outside the exclusion radii.
pub fn interference_exponent(
    cfg: &AnalysisConfig,
    lambda: f64,
    ex: &ExclusionRadii,
    s: f64,
) -> Result<f64> {
    if s == 0.0 || lambda == 0.0 {
        return Ok(0.0);
    }
    let sp = s * cfg.tx_power;
    let model = &cfg.model;
    let integral: f64 = campbell(
        model,
        ex,
        |path, w| {
            cfg.fading
                .for_path(path)
                .laplace_complement(sp * model.gain(w, path))
        },
        |path| knee_distance(model, 1.0 / sp, path),
        &cfg.quadrature,
    )?;
    Ok(2.0 * PI * lambda * integral)
}

/// Laplace transform of the aggregate interference seen by a user served by a
/// `signal_path` link at 2D distance `r` in segment `n`.
pub fn interference_laplace(
    cfg: &AnalysisConfig,
    lambda: f64,
    r: f64,
    s: f64,
    n: usize,
    signal_path: PathType,
) -> Result<f64> {
    check_positive("lambda", lambda).or_else(|e| if lambda == 0.0 { Ok(()) } else { Err(e) })?;
    if !(s >= 0.0) {
        return Err(super::AnalyticError::InvalidInput(format!(
            "s must be non-negative, got {s}"
        )));
    }
    let ex = exclusion_radii(&cfg.model, n, r, signal_path)?;
    Ok((-interference_exponent(cfg, lambda, &ex, s)?).exp())
}
