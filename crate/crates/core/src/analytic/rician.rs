//! Coverage for a serving link with arbitrary (Rician) fading, by inverting
//! the characteristic function of `X = 1/SINR`.
//!
//! With `a = P_N / (P zeta_n)` and interference normalised by the serving
//! path gain, `X = (I' + a) / h`, so
//!
//! `F(w) = int f_h(h) G(w / h) exp(j w a / h) dh`,
//!
//! where `G` is the characteristic function of `I'`. `ln G` is a Campbell
//! functional; it is tabulated once per serving link on a log grid.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use super::ase::{ase_from_noisy_ccdf, AseIntegral};
use super::interference::{campbell, knee_distance};
use super::{check_positive, exclusion_radii, AnalysisConfig, ExclusionRadii, Result};
use crate::channel::PathType;
use crate::fading::Fading;
use crate::quadrature::{
    integrate_with_breaks, invert_characteristic_tail, kronrod15_nodes, QuadratureSpec,
};

const GRID_PER_DECADE: f64 = 48.0;
/// Below this magnitude `ln G` is extended linearly in `t`.
const LINEAR_REGIME: f64 = 1e-10;
/// Beyond this decay `G` is treated as zero.
const NEGLIGIBLE: f64 = -60.0;
const MAX_STEPS: usize = 4000;
/// Panels of the fixed rule over the signal fading power, uniform in `sqrt(h)`.
const FADING_PANELS: usize = 24;

/// Memoised `ln G` for one serving link, plus the pieces needed to evaluate
/// and invert `F`.
#[derive(Debug, Clone)]
pub struct InvSinrKernel {
    signal: Fading,
    /// Fixed quadrature over the serving fading power: `(h, weight * pdf(h))`.
    fading_nodes: Vec<(f64, f64)>,
    noise_ratio: f64,
    u0: f64,
    du: f64,
    values: Vec<Complex64>,
    low_slope: Complex64,
    t_min: f64,
    t_max: f64,
}

struct LogCf<'a> {
    cfg: &'a AnalysisConfig,
    lambda: f64,
    ex: ExclusionRadii,
    zeta_n: f64,
}

impl LogCf<'_> {
    fn eval(&self, t: f64) -> Result<Complex64> {
        if self.lambda == 0.0 || t == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let model = &self.cfg.model;
        let scale = t / self.zeta_n;
        let integral: Complex64 = campbell(
            model,
            &self.ex,
            |path, w| {
                self.cfg
                    .fading
                    .for_path(path)
                    .characteristic_complement(scale * model.gain(w, path))
            },
            |path| knee_distance(model, 1.0 / scale, path),
            &self.cfg.quadrature,
        )?;
        Ok(-2.0 * PI * self.lambda * integral)
    }
}

impl InvSinrKernel {
    pub fn build(
        cfg: &AnalysisConfig,
        lambda: f64,
        r: f64,
        n: usize,
        path: PathType,
        ex: &ExclusionRadii,
    ) -> Result<Self> {
        let zeta_n = cfg.model.segment_gain(n, cfg.model.distance_3d(r), path);
        let lcf = LogCf {
            cfg,
            lambda,
            ex: *ex,
            zeta_n,
        };
        let du = 10f64.ln() / GRID_PER_DECADE;

        let mut up = vec![lcf.eval(1.0)?];
        let mut down = Vec::new();
        if lambda > 0.0 {
            let mut u = 0.0;
            while down.len() < MAX_STEPS {
                let last = down.last().unwrap_or(&up[0]);
                if last.norm() < LINEAR_REGIME && down.len() >= 2 {
                    break;
                }
                u -= du;
                down.push(lcf.eval(u.exp())?);
            }
            let mut u = 0.0;
            while up.len() < MAX_STEPS {
                if up.last().unwrap().re < NEGLIGIBLE && up.len() >= 3 {
                    break;
                }
                u += du;
                up.push(lcf.eval(u.exp())?);
            }
        }
        let u0 = -(down.len() as f64) * du;
        down.reverse();
        let mut values = down;
        values.extend(up);
        let t_min = u0.exp();
        let t_max = (u0 + du * (values.len() - 1) as f64).exp();
        let low_slope = values[0] / t_min;
        let signal = cfg.fading.for_path(path);
        Ok(Self {
            signal,
            fading_nodes: fading_nodes(signal),
            noise_ratio: cfg.noise_power / (cfg.tx_power * zeta_n),
            u0,
            du,
            values,
            low_slope,
            t_min,
            t_max,
        })
    }

    /// Interpolated `ln G(t)`; `None` when `G(t)` is negligible.
    pub fn log_interference_cf(&self, t: f64) -> Option<Complex64> {
        if t <= self.t_min {
            return Some(self.low_slope * t);
        }
        if self.values.len() < 4 {
            return Some(self.low_slope * t);
        }
        if t >= self.t_max {
            return if self.values.last().unwrap().re < NEGLIGIBLE {
                None
            } else {
                Some(*self.values.last().unwrap())
            };
        }
        let x = (t.ln() - self.u0) / self.du;
        let last = self.values.len() - 1;
        let i = (x.floor() as usize).clamp(1, last - 2);
        let f = x - i as f64;
        // Cubic Lagrange through i-1 .. i+2.
        let (p0, p1, p2, p3) = (
            self.values[i - 1],
            self.values[i],
            self.values[i + 1],
            self.values[i + 2],
        );
        let w0 = -f * (f - 1.0) * (f - 2.0) / 6.0;
        let w1 = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
        let w2 = -(f + 1.0) * f * (f - 2.0) / 2.0;
        let w3 = (f + 1.0) * f * (f - 1.0) / 6.0;
        let v = p0 * w0 + p1 * w1 + p2 * w2 + p3 * w3;
        if v.re < NEGLIGIBLE {
            None
        } else {
            Some(v)
        }
    }

    /// `E[exp(j w X)]` with `X = 1/SINR`, using the precomputed fading rule.
    pub fn characteristic(&self, omega: f64) -> Complex64 {
        if omega == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        let a = self.noise_ratio;
        let mut acc = Complex64::new(0.0, 0.0);
        for &(h, w) in &self.fading_nodes {
            if let Some(lg) = self.log_interference_cf(omega / h) {
                acc += (lg + Complex64::new(0.0, omega * a / h)).exp() * w;
            }
        }
        acc
    }

    /// Same as [`Self::characteristic`] but with adaptive integration over the fading power.
    pub fn characteristic_adaptive(&self, omega: f64, spec: &QuadratureSpec) -> Result<Complex64> {
        if omega == 0.0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let signal = self.signal;
        let a = self.noise_ratio;
        let integrand = |h: f64| -> Complex64 {
            if h <= 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let density = signal.pdf(h).unwrap_or(0.0);
            if density == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            match self.log_interference_cf(omega / h) {
                Some(lg) => (lg + Complex64::new(0.0, omega * a / h)).exp() * density,
                None => Complex64::new(0.0, 0.0),
            }
        };
        let hi = fading_upper(self.signal);
        let breaks = [0.125, 0.25, 0.5, 1.0, 2.0, 4.0];
        let res = integrate_with_breaks(integrand, 0.0, hi, &breaks, spec)?;
        Ok(res.value)
    }

    /// `Pr[SINR > gamma]`.
    pub fn coverage(&self, gamma: f64, spec: &QuadratureSpec) -> Result<f64> {
        let inversion = inversion_spec(spec);
        let tail = invert_characteristic_tail(|w| self.characteristic(w), gamma, &inversion)?;
        Ok(tail.probability)
    }

    /// `E[log2(1 + SINR) 1{SINR > gamma0}]` for this serving link, integrated
    /// by parts over the conditional CCDF. `F` is memoised across thresholds.
    pub fn conditional_ase(&self, gamma0: f64, spec: &QuadratureSpec) -> Result<AseIntegral> {
        let inversion = inversion_spec(spec);
        let mut memo: HashMap<u64, Complex64> = HashMap::new();
        let mut failure = None;
        let ccdf = |g: f64| -> f64 {
            if failure.is_some() {
                return 0.0;
            }
            let charfn = |w: f64| {
                *memo
                    .entry(w.to_bits())
                    .or_insert_with(|| self.characteristic(w))
            };
            match invert_characteristic_tail(charfn, g, &inversion) {
                Ok(t) => t.probability,
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        };
        let res = ase_from_noisy_ccdf(1.0, gamma0, ccdf, 10.0 * inversion.abs_tol, &spec.ase())?;
        match failure {
            Some(e) => Err(e.into()),
            None => Ok(res),
        }
    }
}

/// Tolerances of the Gil-Pelaez integral: absolute accuracy three digits
/// below the outer relative tolerance.
pub(crate) fn inversion_spec(spec: &QuadratureSpec) -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: spec.rel_tol.max(1e-6),
        abs_tol: (rician_outer(spec).outer_rel_tol * 1e-3).max(1e-12),
        ..*spec
    }
}

/// Outer tolerances used when the serving link is Rician: the nested
/// inversion is expensive, so the relative tolerance is floored at 1e-4 and
/// an absolute floor matching the inversion accuracy is added.
pub(crate) fn rician_outer(spec: &QuadratureSpec) -> QuadratureSpec {
    QuadratureSpec {
        outer_rel_tol: spec.outer_rel_tol.max(RICIAN_OUTER_REL_TOL),
        ..*spec
    }
}

pub(crate) const RICIAN_OUTER_REL_TOL: f64 = 1e-4;

/// Power beyond which the fading density is negligible (tail below ~e^-40).
fn fading_upper(signal: Fading) -> f64 {
    match signal {
        Fading::Rayleigh => 40.0,
        Fading::Rician { k } => {
            let x = (k / (k + 1.0)).sqrt() + (40.0 / (k + 1.0)).sqrt();
            x * x
        }
    }
}

fn fading_nodes(signal: Fading) -> Vec<(f64, f64)> {
    // Panels uniform in v = sqrt(h); dh = 2 v dv.
    let v_hi = fading_upper(signal).sqrt();
    let dv = v_hi / FADING_PANELS as f64;
    let mut nodes = Vec::with_capacity(FADING_PANELS * 15);
    for i in 0..FADING_PANELS {
        for (v, w) in kronrod15_nodes(i as f64 * dv, (i + 1) as f64 * dv) {
            let h = v * v;
            let density = signal.pdf(h).unwrap_or(0.0);
            if density > 0.0 {
                nodes.push((h, w * 2.0 * v * density));
            }
        }
    }
    nodes
}

/// Directly evaluated (unmemoised) `ln G(t)`, for cross-checks.
pub fn log_interference_cf_direct(
    cfg: &AnalysisConfig,
    lambda: f64,
    r: f64,
    n: usize,
    path: PathType,
    t: f64,
) -> Result<Complex64> {
    let ex = exclusion_radii(&cfg.model, n, r, path)?;
    LogCf {
        cfg,
        lambda,
        ex,
        zeta_n: cfg.model.segment_gain(n, cfg.model.distance_3d(r), path),
    }
    .eval(t)
}

/// Characteristic function of `1/SINR` given the serving link.
pub fn characteristic_fn_inv_sinr(
    cfg: &AnalysisConfig,
    lambda: f64,
    r: f64,
    n: usize,
    path: PathType,
    omega: f64,
) -> Result<Complex64> {
    if lambda != 0.0 {
        check_positive("lambda", lambda)?;
    }
    let ex = exclusion_radii(&cfg.model, n, r, path)?;
    let kernel = InvSinrKernel::build(cfg, lambda, r, n, path, &ex)?;
    kernel.characteristic_adaptive(omega, &cfg.quadrature)
}

/// `Pr[SINR > gamma]` given the serving link, by characteristic-function
/// inversion. Works for any serving-link fading.
pub fn conditional_coverage_rician(
    cfg: &AnalysisConfig,
    lambda: f64,
    r: f64,
    gamma: f64,
    n: usize,
    path: PathType,
) -> Result<f64> {
    if gamma == 0.0 {
        return Ok(1.0);
    }
    check_positive("gamma", gamma)?;
    if lambda != 0.0 {
        check_positive("lambda", lambda)?;
    }
    let ex = exclusion_radii(&cfg.model, n, r, path)?;
    let kernel = InvSinrKernel::build(cfg, lambda, r, n, path, &ex)?;
    kernel.coverage(gamma, &cfg.quadrature)
}

/// Kernels keyed by serving link, reused across thresholds at one density.
#[derive(Default)]
pub(crate) struct KernelCache {
    map: Mutex<HashMap<(usize, PathType, u64), Arc<InvSinrKernel>>>,
}

impl KernelCache {
    pub(crate) fn get_or_build(
        &self,
        cfg: &AnalysisConfig,
        lambda: f64,
        r: f64,
        n: usize,
        path: PathType,
        ex: &ExclusionRadii,
    ) -> Result<Arc<InvSinrKernel>> {
        let key = (n, path, r.to_bits());
        if let Some(k) = self.map.lock().unwrap().get(&key) {
            return Ok(Arc::clone(k));
        }
        let kernel = Arc::new(InvSinrKernel::build(cfg, lambda, r, n, path, ex)?);
        self.map.lock().unwrap().insert(key, Arc::clone(&kernel));
        Ok(kernel)
    }
}
