//! ASE from an SINR CCDF, integrated by parts in `ln gamma`.
//!
//! `ASE = lambda * int_{g0}^inf log2(1 + g) f(g) dg`
//! `    = lambda * [log2(1 + g0) p(g0) + (1/ln 2) int_{g0}^inf p(g) / (1 + g) dg]`.

use std::f64::consts::LN_2;

use super::Result;
use crate::quadrature::{integrate_with_breaks, QuadratureSpec};

/// The threshold integral stops once the CCDF falls below this fraction of `p(g0)`.
const CUTOFF_RATIO: f64 = 1e-4;
/// Largest relative contribution tolerated from the confirmation extension.
const TAIL_SHARE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AseIntegral {
    pub ase: f64,
    pub p_at_gamma0: f64,
    pub gamma_max: f64,
    pub converged: bool,
}

pub fn ase_from_ccdf<F>(
    lambda: f64,
    gamma0: f64,
    ccdf: F,
    spec: &QuadratureSpec,
) -> Result<AseIntegral>
where
    F: FnMut(f64) -> f64,
{
    ase_from_noisy_ccdf(lambda, gamma0, ccdf, 0.0, spec)
}

/// As [`ase_from_ccdf`] for a CCDF known only to absolute accuracy `floor`:
/// the threshold integral also stops once the CCDF drops below `floor`.
pub fn ase_from_noisy_ccdf<F>(
    lambda: f64,
    gamma0: f64,
    mut ccdf: F,
    floor: f64,
    spec: &QuadratureSpec,
) -> Result<AseIntegral>
where
    F: FnMut(f64) -> f64,
{
    let p0 = ccdf(gamma0);
    if p0 <= floor {
        return Ok(AseIntegral {
            ase: lambda * (1.0 + gamma0).log2() * p0.max(0.0),
            p_at_gamma0: p0.max(0.0),
            gamma_max: gamma0,
            converged: true,
        });
    }
    let step = 10f64.ln() / 2.0;
    let t0 = gamma0.ln();
    let mut breaks = Vec::new();
    let mut t = t0;
    let mut found = false;
    for _ in 0..80 {
        t += step;
        breaks.push(t);
        if ccdf(t.exp()) < (CUTOFF_RATIO * p0).max(floor) {
            found = true;
            break;
        }
    }

    let mut integrand = |t: f64| {
        let g = t.exp();
        ccdf(g) * g / (1.0 + g)
    };
    let t_main = t;
    let main = integrate_with_breaks(&mut integrand, t0, t_main, &breaks, spec)?;
    let mut value = main.value;
    let mut converged = main.converged && found;
    let mut t_end = t_main;
    let ext = 4f64.ln();
    for _ in 0..20 {
        let part = integrate_with_breaks(&mut integrand, t_end, t_end + ext, &[], spec)?;
        value += part.value;
        converged &= part.converged;
        t_end += ext;
        if part.value <= TAIL_SHARE * value || part.value <= floor * ext {
            break;
        }
    }
    let ase = lambda * ((1.0 + gamma0).log2() * p0 + value / LN_2);
    Ok(AseIntegral {
        ase,
        p_at_gamma0: p0,
        gamma_max: t_end.exp(),
        converged,
    })
}

/// `-dp/dgamma` by a central difference with relative step `h` in `ln gamma`.
pub fn pdf_from_ccdf<F: FnMut(f64) -> f64>(mut ccdf: F, gamma: f64, h: f64) -> f64 {
    let hi = gamma * h.exp();
    let lo = gamma * (-h).exp();
    -(ccdf(hi) - ccdf(lo)) / (hi - lo)
}
