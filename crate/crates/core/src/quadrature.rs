//! Adaptive Gauss-Kronrod integration on finite and semi-infinite ranges,
//! plus the Gil-Pelaez inversion used to turn a characteristic function into
//! a tail probability.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("integrand is not finite at x = {abscissa}")]
    NonFinite { abscissa: f64 },
    #[error("invalid integration interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("integral over [{a}, inf) appears to diverge")]
    Divergent { a: f64 },
}

/// Tolerances and budgets for one class of integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Upper cutoff of the inversion integral, in units of the inverse threshold.
    pub omega_max: f64,
    /// Maximum number of octave panels in the inversion integral.
    pub omega_panels: usize,
    /// Relative tolerance of the outer (association distance) integral.
    pub outer_rel_tol: f64,
    /// Relative tolerance of the SINR-threshold integral behind ASE.
    pub ase_rel_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-14,
            max_subdivisions: 400,
            omega_max: 1e7,
            omega_panels: 48,
            outer_rel_tol: 1e-6,
            ase_rel_tol: 1e-5,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    pub fn is_valid(&self) -> bool {
        self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.omega_max > 0.0
            && self.max_subdivisions > 0
            && self.omega_panels > 0
            && self.outer_rel_tol > 0.0
            && self.ase_rel_tol > 0.0
    }

    /// Tolerances for the outer integral: relative only, so values deep in
    /// the crash regime keep their significant digits.
    pub fn outer(&self) -> Self {
        Self {
            rel_tol: self.outer_rel_tol,
            abs_tol: f64::MIN_POSITIVE,
            ..*self
        }
    }

    pub fn ase(&self) -> Self {
        Self {
            rel_tol: self.ase_rel_tol,
            abs_tol: f64::MIN_POSITIVE,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationResult<T = f64> {
    pub value: T,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Values that can be integrated: real or complex.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
    fn finite(&self) -> bool;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn finite(&self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

/// Nodes and weights of the 15-point Kronrod rule mapped to `[a, b]`.
pub fn kronrod15_nodes(a: f64, b: f64) -> [(f64, f64); 15] {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut out = [(center, WGK[7] * half); 15];
    for j in 0..7 {
        let dx = half * XGK[j];
        out[2 * j] = (center - dx, WGK[j] * half);
        out[2 * j + 1] = (center + dx, WGK[j] * half);
    }
    out
}

fn kronrod15<T: QuadValue, F: FnMut(f64) -> T>(
    f: &mut F,
    a: f64,
    b: f64,
) -> Result<Panel<T>, QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |x: f64| -> Result<T, QuadError> {
        let v = f(x);
        if v.finite() {
            Ok(v)
        } else {
            Err(QuadError::NonFinite { abscissa: x })
        }
    };

    let fc = eval(center)?;
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = fc.magnitude() * WGK[7];
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        resk = resk + (f1 + f2) * WGK[j];
        resabs += WGK[j] * (f1.magnitude() + f2.magnitude());
        if j % 2 == 1 {
            resg = resg + (f1 + f2) * WG[j / 2];
        }
    }
    let reskh = resk * 0.5;
    let mut resasc = WGK[7] * (fc - reskh).magnitude();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - reskh).magnitude() + (fv2[j] - reskh).magnitude());
    }
    let width = half.abs();
    resasc *= width;
    resabs *= width;
    let mut err = (resk - resg).magnitude() * width;
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Ok(Panel {
        a,
        b,
        value: resk * half,
        error: err,
    })
}

struct ByError<T>(Panel<T>);

impl<T> PartialEq for ByError<T> {
    fn eq(&self, other: &Self) -> bool {
        self.0.error == other.0.error
    }
}
impl<T> Eq for ByError<T> {}
impl<T> PartialOrd for ByError<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for ByError<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.error.total_cmp(&other.0.error)
    }
}

/// Globally adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
pub fn integrate_finite<T, F>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<IntegrationResult<T>, QuadError>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(QuadError::InvalidInterval { a, b });
    }
    if a == b {
        return Ok(IntegrationResult {
            value: T::zero(),
            error_estimate: 0.0,
            evaluations: 0,
            converged: true,
        });
    }

    let first = kronrod15(&mut f, a, b)?;
    let mut evaluations = 15;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    // Panels too narrow to split further are parked here.
    let mut frozen: Vec<Panel<T>> = Vec::new();
    let mut frozen_err = 0.0;
    heap.push(ByError(first));

    let mut subdivisions = 1;
    let mut converged = false;
    loop {
        let tol = spec.abs_tol.max(spec.rel_tol * total.magnitude());
        if total_err <= tol {
            converged = true;
            break;
        }
        if subdivisions >= spec.max_subdivisions {
            break;
        }
        let Some(ByError(worst)) = heap.pop() else {
            break;
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b || (worst.b - worst.a) < 4.0 * f64::EPSILON * mid.abs()
        {
            frozen_err += worst.error;
            frozen.push(worst);
            if frozen_err > tol {
                break;
            }
            continue;
        }
        let left = kronrod15(&mut f, worst.a, mid)?;
        let right = kronrod15(&mut f, mid, worst.b)?;
        evaluations += 30;
        subdivisions += 1;
        total = total - worst.value + left.value + right.value;
        total_err += left.error + right.error - worst.error;
        heap.push(ByError(left));
        heap.push(ByError(right));
    }

    // Re-sum to shed accumulated rounding in the running totals.
    let mut value = T::zero();
    let mut error = 0.0;
    for p in heap.iter().map(|e| &e.0).chain(frozen.iter()) {
        value = value + p.value;
        error += p.error;
    }
    let tol = spec.abs_tol.max(spec.rel_tol * value.magnitude());
    Ok(IntegrationResult {
        value,
        error_estimate: error,
        evaluations,
        converged: converged || error <= tol,
    })
}

/// Integrates over consecutive sub-intervals split at `points` (sorted, inside `[a, b]`).
pub fn integrate_with_breaks<T, F>(
    mut f: F,
    a: f64,
    b: f64,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<IntegrationResult<T>, QuadError>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    let mut edges = Vec::with_capacity(points.len() + 2);
    edges.push(a);
    edges.extend(points.iter().copied().filter(|&p| p > a && p < b));
    edges.push(b);
    edges.dedup();
    let mut acc = IntegrationResult {
        value: T::zero(),
        error_estimate: 0.0,
        evaluations: 0,
        converged: true,
    };
    for w in edges.windows(2) {
        let part = integrate_finite(&mut f, w[0], w[1], spec)?;
        acc.value = acc.value + part.value;
        acc.error_estimate += part.error_estimate;
        acc.evaluations += part.evaluations;
        acc.converged &= part.converged;
    }
    Ok(acc)
}

/// Change of variables used to fold `[a, inf)` onto `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailMap {
    /// `u = a + c t / (1 - t)`
    Rational { scale: f64 },
    /// `u = a - c ln(1 - t)`
    Exponential { scale: f64 },
    /// `u = a * exp(scale * t / (1 - t))`; needs `a > 0`, suited to power-law tails.
    Logarithmic { scale: f64 },
}

impl TailMap {
    fn apply(self, a: f64, t: f64) -> (f64, f64) {
        match self {
            TailMap::Rational { scale } => {
                let s = 1.0 - t;
                (a + scale * t / s, scale / (s * s))
            }
            TailMap::Exponential { scale } => {
                let s = 1.0 - t;
                (a - scale * s.ln(), scale / s)
            }
            TailMap::Logarithmic { scale } => {
                let s = 1.0 - t;
                let u = a * (scale * t / s).exp();
                (u, u * scale / (s * s))
            }
        }
    }

    fn scale(self) -> f64 {
        match self {
            TailMap::Rational { scale }
            | TailMap::Exponential { scale }
            | TailMap::Logarithmic { scale } => scale,
        }
    }
}

/// Integrates `f` over `[a, inf)` through the rational map with unit scale.
pub fn integrate_semi_infinite<T, F>(
    f: F,
    a: f64,
    spec: &QuadratureSpec,
) -> Result<IntegrationResult<T>, QuadError>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    integrate_semi_infinite_with(f, a, TailMap::Rational { scale: 1.0 }, spec)
}

pub fn integrate_semi_infinite_with<T, F>(
    mut f: F,
    a: f64,
    map: TailMap,
    spec: &QuadratureSpec,
) -> Result<IntegrationResult<T>, QuadError>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    let bad_origin = matches!(map, TailMap::Logarithmic { .. }) && !(a > 0.0);
    if !a.is_finite() || !(map.scale() > 0.0) || bad_origin {
        return Err(QuadError::InvalidInterval {
            a,
            b: f64::INFINITY,
        });
    }
    let res = {
        let mapped = |t: f64| -> T {
            let (u, jac) = map.apply(a, t);
            if !u.is_finite() || !jac.is_finite() || jac == 0.0 {
                return T::zero();
            }
            f(u) * jac
        };
        integrate_finite(mapped, 0.0, 1.0, spec)?
    };
    if !res.converged && tail_diverges(&mut f, a, map.scale(), spec) {
        return Err(QuadError::Divergent { a });
    }
    Ok(res)
}

// Partial sums over far octaves that fail to shrink indicate divergence.
fn tail_diverges<T: QuadValue, F: FnMut(f64) -> T>(
    f: &mut F,
    a: f64,
    scale: f64,
    spec: &QuadratureSpec,
) -> bool {
    let mut previous: Option<f64> = None;
    let mut growing = 0;
    for k in 20..24 {
        let lo = a + scale * 2f64.powi(k);
        let hi = a + scale * 2f64.powi(k + 1);
        let Ok(panel) = kronrod15(f, lo, hi) else {
            return true;
        };
        let size = panel.value.magnitude();
        if let Some(prev) = previous {
            if size >= 0.999 * prev && size > spec.abs_tol {
                growing += 1;
            }
        }
        previous = Some(size);
    }
    growing == 3
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailProbability {
    /// Result clamped to `[0, 1]`.
    pub probability: f64,
    /// Unclamped inversion result.
    pub raw: f64,
    pub omega_cutoff: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Returns `Pr[X < 1/gamma]` for a non-negative `X` with characteristic
/// function `charfn`, i.e. `Pr[SINR > gamma]` when `X = 1/SINR`.
///
/// Uses the real Gil-Pelaez form
/// `1/2 - (1/pi) * int_0^inf Im(exp(-j w x) F(w)) / w dw` with `x = 1/gamma`,
/// extending the upper limit by octaves until two consecutive octaves each
/// contribute less than `abs_tol`.
pub fn invert_characteristic_tail<F>(
    mut charfn: F,
    gamma: f64,
    spec: &QuadratureSpec,
) -> Result<TailProbability, QuadError>
where
    F: FnMut(f64) -> Complex64,
{
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(QuadError::InvalidInterval { a: 0.0, b: gamma });
    }
    let x = 1.0 / gamma;
    let mut integrand = |w: f64| -> f64 {
        let rot = Complex64::from_polar(1.0, -w * x);
        (rot * charfn(w)).im / w
    };
    // First panel spans at most half an oscillation period of exp(-j w x).
    // Snapping it to a power of two keeps the panel edges independent of
    // `gamma`, so a memoised `charfn` is reused across thresholds.
    let w0 = 2f64.powi((std::f64::consts::PI / x).log2().floor() as i32);
    let w_cap = spec.omega_max / x;
    let panel_spec = QuadratureSpec {
        abs_tol: spec.abs_tol * std::f64::consts::PI * 0.25,
        ..*spec
    };

    let first = integrate_finite(&mut integrand, 0.0, w0, &panel_spec)?;
    let mut total = first.value;
    let mut evaluations = first.evaluations;
    let mut all_converged = first.converged;
    let mut quiet = 0;
    let mut lo = w0;
    let mut tail_done = false;
    for _ in 0..spec.omega_panels {
        if lo >= w_cap {
            break;
        }
        let hi = (2.0 * lo).min(w_cap);
        let part = integrate_finite(&mut integrand, lo, hi, &panel_spec)?;
        total += part.value;
        evaluations += part.evaluations;
        all_converged &= part.converged;
        if part.value.abs() < spec.abs_tol * std::f64::consts::PI {
            quiet += 1;
            if quiet >= 2 {
                lo = hi;
                tail_done = true;
                break;
            }
        } else {
            quiet = 0;
        }
        lo = hi;
    }
    let raw = 0.5 - total / std::f64::consts::PI;
    Ok(TailProbability {
        probability: raw.clamp(0.0, 1.0),
        raw,
        omega_cutoff: lo,
        evaluations,
        converged: tail_done && all_converged,
    })
}
