//! Multi-slope LoS/NLoS path loss with a piecewise LoS probability.
//!
//! All distances are in km. Gains `A` are linear path gains at a 3D distance
//! of 1 km, so a segment's gain is `A * w^(-alpha)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{db_to_linear, meters_to_km};

/// Smallest 3D distance at which gains are evaluated (1 mm).
pub const DEFAULT_DISTANCE_FLOOR_KM: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("3D distance {w} km is below the antenna height difference {l} km")]
    BelowHeightDifference { w: f64, l: f64 },
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
    #[error("segment index {n} out of range (model has {count} segments)")]
    NoSuchSegment { n: usize, count: usize },
    #[error("2D distance {r} km lies outside segment {n}")]
    OutsideSegment { r: f64, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathType {
    Los,
    Nlos,
}

impl PathType {
    pub fn other(self) -> Self {
        match self {
            PathType::Los => PathType::Nlos,
            PathType::Nlos => PathType::Los,
        }
    }
}

/// One piece of the path-loss function, valid for `d_lo < w <= d_hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSegment {
    pub d_lo: f64,
    pub d_hi: f64,
    pub a_los: f64,
    pub alpha_los: f64,
    pub a_nlos: f64,
    pub alpha_nlos: f64,
}

impl PathSegment {
    #[inline]
    pub fn gain(&self, w: f64, path: PathType) -> f64 {
        match path {
            PathType::Los => self.a_los * w.powf(-self.alpha_los),
            PathType::Nlos => self.a_nlos * w.powf(-self.alpha_nlos),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LosProbability {
    AlwaysLos,
    /// `1 - w/d1` up to `d1`, zero beyond.
    Linear {
        d1: f64,
    },
    /// `1 - 5 exp(-R1/w)` up to `d1 = R1/ln 10`, then `min(0.5, 5 exp(-w/R2))`.
    Exponential3gpp {
        r1: f64,
        r2: f64,
    },
    /// One up to `d1`, linear ramp to zero at `d2`.
    ThreePieceLinear {
        d1: f64,
        d2: f64,
    },
}

impl LosProbability {
    /// Unclamped formula value.
    pub fn raw(&self, w: f64) -> f64 {
        match *self {
            LosProbability::AlwaysLos => 1.0,
            LosProbability::Linear { d1 } => {
                if w <= d1 {
                    1.0 - w / d1
                } else {
                    0.0
                }
            }
            LosProbability::Exponential3gpp { r1, r2 } => {
                if w <= r1 / std::f64::consts::LN_10 {
                    1.0 - 5.0 * (-r1 / w).exp()
                } else {
                    (5.0 * (-w / r2).exp()).min(0.5)
                }
            }
            LosProbability::ThreePieceLinear { d1, d2 } => {
                if w <= d1 {
                    1.0
                } else if w <= d2 {
                    1.0 - (w - d1) / (d2 - d1)
                } else {
                    0.0
                }
            }
        }
    }

    #[inline]
    pub fn eval(&self, w: f64) -> f64 {
        self.raw(w).clamp(0.0, 1.0)
    }

    /// Distances where the formula changes branch or has a kink.
    pub fn kinks(&self) -> Vec<f64> {
        match *self {
            LosProbability::AlwaysLos => vec![],
            LosProbability::Linear { d1 } => vec![d1],
            LosProbability::Exponential3gpp { r1, r2 } => {
                let d1 = r1 / std::f64::consts::LN_10;
                let knee = r2 * 10f64.ln();
                if knee > d1 {
                    vec![d1, knee]
                } else {
                    vec![d1]
                }
            }
            LosProbability::ThreePieceLinear { d1, d2 } => vec![d1, d2],
        }
    }

    /// Distance beyond which the probability is identically zero, if any.
    pub fn support_end(&self) -> Option<f64> {
        match *self {
            LosProbability::Linear { d1 } => Some(d1),
            LosProbability::ThreePieceLinear { d2, .. } => Some(d2),
            _ => None,
        }
    }

    /// `int_a^b Pr(v) 2 pi v dv`: expected LoS base stations per unit density
    /// whose 3D distance lies in `[a, b]`.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        use std::f64::consts::PI;
        if !(b > a) {
            return 0.0;
        }
        let disc = |lo: f64, hi: f64| PI * (hi * hi - lo * lo);
        let clip = |lo: f64, hi: f64| (a.max(lo), b.min(hi));
        match *self {
            LosProbability::AlwaysLos => disc(a, b),
            LosProbability::Linear { d1 } => {
                let (lo, hi) = clip(0.0, d1);
                if hi <= lo {
                    return 0.0;
                }
                let prim = |v: f64| v * v / 2.0 - v * v * v / (3.0 * d1);
                2.0 * PI * (prim(hi) - prim(lo))
            }
            LosProbability::ThreePieceLinear { d1, d2 } => {
                let mut m = 0.0;
                let (lo, hi) = clip(0.0, d1);
                if hi > lo {
                    m += disc(lo, hi);
                }
                let (lo, hi) = clip(d1, d2);
                if hi > lo {
                    let prim = |v: f64| d2 * v * v / 2.0 - v * v * v / 3.0;
                    m += 2.0 * PI / (d2 - d1) * (prim(hi) - prim(lo));
                }
                m
            }
            LosProbability::Exponential3gpp { r1, r2 } => {
                let d1 = r1 / std::f64::consts::LN_10;
                let knee = (r2 * 10f64.ln()).max(d1);
                let mut m = 0.0;
                let (lo, hi) = clip(0.0, d1);
                if hi > lo {
                    let spec = crate::quadrature::QuadratureSpec::with_tolerances(1e-12, 1e-300);
                    let tail = crate::quadrature::integrate_finite(
                        |v: f64| if v > 0.0 { (-r1 / v).exp() * v } else { 0.0 },
                        lo,
                        hi,
                        &spec,
                    )
                    .map(|r| r.value)
                    .unwrap_or(f64::NAN);
                    m += disc(lo, hi) - 10.0 * PI * tail;
                }
                let (lo, hi) = clip(d1, knee);
                if hi > lo {
                    m += 0.5 * disc(lo, hi);
                }
                let (lo, hi) = clip(knee, f64::INFINITY);
                if hi > lo {
                    let prim = |v: f64| {
                        if v.is_infinite() {
                            0.0
                        } else {
                            -r2 * (-v / r2).exp() * (v + r2)
                        }
                    };
                    m += 10.0 * PI * (prim(hi) - prim(lo));
                }
                m
            }
        }
    }

    /// Characteristic extent of the LoS region.
    pub fn transition_distance(&self) -> f64 {
        match *self {
            LosProbability::AlwaysLos => 0.0,
            LosProbability::Linear { d1 } => d1,
            LosProbability::Exponential3gpp { r1, .. } => r1 / std::f64::consts::LN_10,
            LosProbability::ThreePieceLinear { d2, .. } => d2,
        }
    }
}

/// Immutable piecewise path-loss model.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLossModel {
    segments: Vec<PathSegment>,
    los_prob: LosProbability,
    height_diff: f64,
    distance_floor: f64,
}

fn positive(name: &str, v: f64) -> Result<f64, ChannelError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ChannelError::InvalidParameter(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn non_negative(name: &str, v: f64) -> Result<f64, ChannelError> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(ChannelError::InvalidParameter(format!(
            "{name} must be non-negative and finite, got {v}"
        )))
    }
}

/// Power-law parameters shared by every segment of the built-in models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub a_los: f64,
    pub alpha_los: f64,
    pub a_nlos: f64,
    pub alpha_nlos: f64,
}

impl PowerLaw {
    /// 3GPP TR 36.828 pico parameters: 103.8 + 20.9 log10(R) and 145.4 + 37.5 log10(R), R in km.
    pub fn tr36828() -> Self {
        Self {
            a_los: 10f64.powf(-10.38),
            alpha_los: 2.09,
            a_nlos: 10f64.powf(-14.54),
            alpha_nlos: 3.75,
        }
    }

    fn check(&self) -> Result<(), ChannelError> {
        positive("A_los", self.a_los)?;
        positive("alpha_los", self.alpha_los)?;
        positive("A_nlos", self.a_nlos)?;
        positive("alpha_nlos", self.alpha_nlos)?;
        Ok(())
    }

    fn segment(&self, d_lo: f64, d_hi: f64) -> PathSegment {
        PathSegment {
            d_lo,
            d_hi,
            a_los: self.a_los,
            alpha_los: self.alpha_los,
            a_nlos: self.a_nlos,
            alpha_nlos: self.alpha_nlos,
        }
    }
}

impl PathLossModel {
    /// Builds a model from explicit segments. Tiling and positivity are
    /// enforced here; continuity and monotonicity are reported by [`Self::validate`].
    pub fn new(
        segments: Vec<PathSegment>,
        los_prob: LosProbability,
        height_diff: f64,
    ) -> Result<Self, ChannelError> {
        non_negative("L", height_diff)?;
        if segments.is_empty() {
            return Err(ChannelError::InvalidParameter("no segments".into()));
        }
        for (i, s) in segments.iter().enumerate() {
            positive("A_los", s.a_los)?;
            positive("alpha_los", s.alpha_los)?;
            positive("A_nlos", s.a_nlos)?;
            positive("alpha_nlos", s.alpha_nlos)?;
            if !(s.d_lo < s.d_hi) {
                return Err(ChannelError::InvalidParameter(format!(
                    "segment {i}: d_lo {} must be below d_hi {}",
                    s.d_lo, s.d_hi
                )));
            }
            if i > 0 && segments[i - 1].d_hi != s.d_lo {
                return Err(ChannelError::InvalidParameter(format!(
                    "segment {i} does not start where segment {} ends",
                    i - 1
                )));
            }
        }
        if segments[0].d_lo != height_diff {
            return Err(ChannelError::InvalidParameter(
                "first segment must start at L".into(),
            ));
        }
        if segments.last().unwrap().d_hi != f64::INFINITY {
            return Err(ChannelError::InvalidParameter(
                "last segment must extend to infinity".into(),
            ));
        }
        Ok(Self {
            segments,
            los_prob,
            height_diff,
            distance_floor: DEFAULT_DISTANCE_FLOOR_KM,
        })
    }

    pub fn case1(d1: f64, law: PowerLaw, l: f64) -> Result<Self, ChannelError> {
        law.check()?;
        positive("d1", d1)?;
        non_negative("L", l)?;
        if d1 <= l {
            return Err(ChannelError::InvalidParameter(format!(
                "d1 ({d1} km) must exceed L ({l} km)"
            )));
        }
        Self::new(
            vec![law.segment(l, d1), law.segment(d1, f64::INFINITY)],
            LosProbability::Linear { d1 },
            l,
        )
    }

    pub fn case2(r1: f64, r2: f64, law: PowerLaw, l: f64) -> Result<Self, ChannelError> {
        law.check()?;
        positive("R1", r1)?;
        positive("R2", r2)?;
        non_negative("L", l)?;
        let d1 = r1 / std::f64::consts::LN_10;
        if d1 <= l {
            return Err(ChannelError::InvalidParameter(format!(
                "R1/ln10 ({d1} km) must exceed L ({l} km)"
            )));
        }
        Self::new(
            vec![law.segment(l, d1), law.segment(d1, f64::INFINITY)],
            LosProbability::Exponential3gpp { r1, r2 },
            l,
        )
    }

    pub fn approx_case2(d1: f64, d2: f64, law: PowerLaw, l: f64) -> Result<Self, ChannelError> {
        law.check()?;
        non_negative("L", l)?;
        if !(l < d1 && d1 < d2 && d2.is_finite()) {
            return Err(ChannelError::InvalidParameter(format!(
                "breakpoints must satisfy L < d1 < d2, got L={l}, d1={d1}, d2={d2}"
            )));
        }
        Self::new(
            vec![
                law.segment(l, d1),
                law.segment(d1, d2),
                law.segment(d2, f64::INFINITY),
            ],
            LosProbability::ThreePieceLinear { d1, d2 },
            l,
        )
    }

    pub fn single_slope(a: f64, alpha: f64, l: f64) -> Result<Self, ChannelError> {
        positive("A", a)?;
        positive("alpha", alpha)?;
        non_negative("L", l)?;
        let law = PowerLaw {
            a_los: a,
            alpha_los: alpha,
            a_nlos: a,
            alpha_nlos: alpha,
        };
        Self::new(
            vec![law.segment(l, f64::INFINITY)],
            LosProbability::AlwaysLos,
            l,
        )
    }

    pub fn with_distance_floor(mut self, floor: f64) -> Self {
        self.distance_floor = floor;
        self
    }

    pub fn segments(&self) -> &[PathSegment] {
        &self.segments
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    pub fn los_probability_fn(&self) -> &LosProbability {
        &self.los_prob
    }

    pub fn height_diff(&self) -> f64 {
        self.height_diff
    }

    pub fn distance_floor(&self) -> f64 {
        self.distance_floor
    }

    /// Smallest 3D distance used in evaluation.
    #[inline]
    pub fn min_distance(&self) -> f64 {
        self.height_diff.max(self.distance_floor)
    }

    /// Index of the segment containing 3D distance `w`.
    #[inline]
    pub fn segment_of(&self, w: f64) -> usize {
        self.segments
            .iter()
            .position(|s| w <= s.d_hi)
            .unwrap_or(self.segments.len() - 1)
    }

    /// Composite gain, clamped at the distance floor. Infallible variant of [`Self::path_gain`].
    #[inline]
    pub fn gain(&self, w: f64, path: PathType) -> f64 {
        let w = w.max(self.min_distance());
        self.segments[self.segment_of(w)].gain(w, path)
    }

    pub fn path_gain(&self, w: f64, path: PathType) -> Result<f64, ChannelError> {
        if w < self.height_diff * (1.0 - 1e-12) {
            return Err(ChannelError::BelowHeightDifference {
                w,
                l: self.height_diff,
            });
        }
        Ok(self.gain(w, path))
    }

    /// Gain from the formula of segment `n`, regardless of which segment contains `w`.
    #[inline]
    pub fn segment_gain(&self, n: usize, w: f64, path: PathType) -> f64 {
        self.segments[n].gain(w.max(self.min_distance()), path)
    }

    #[inline]
    pub fn los_probability(&self, w: f64) -> f64 {
        self.los_prob.eval(w)
    }

    /// Probability that a link at 3D distance `w` is of type `path`.
    #[inline]
    pub fn path_probability(&self, w: f64, path: PathType) -> f64 {
        let p = self.los_probability(w);
        match path {
            PathType::Los => p,
            PathType::Nlos => 1.0 - p,
        }
    }

    /// `int_0^r Pr^L(w(u)) 2 pi u du`.
    pub fn los_mass(&self, r: f64) -> f64 {
        self.los_prob
            .mass(self.height_diff, self.distance_3d(r))
            .clamp(0.0, std::f64::consts::PI * r * r)
    }

    /// `int_0^r (1 - Pr^L(w(u))) 2 pi u du`.
    pub fn nlos_mass(&self, r: f64) -> f64 {
        (std::f64::consts::PI * r * r - self.los_mass(r)).max(0.0)
    }

    pub fn path_mass(&self, r: f64, path: PathType) -> f64 {
        match path {
            PathType::Los => self.los_mass(r),
            PathType::Nlos => self.nlos_mass(r),
        }
    }

    #[inline]
    pub fn distance_3d(&self, r: f64) -> f64 {
        distance_3d(r, self.height_diff)
    }

    /// 2D distance at which the 3D distance equals `w` (zero when `w <= L`).
    #[inline]
    pub fn radial_distance(&self, w: f64) -> f64 {
        if w.is_infinite() {
            return f64::INFINITY;
        }
        (w * w - self.height_diff * self.height_diff)
            .max(0.0)
            .sqrt()
    }

    /// 2D range `(r_lo, r_hi]` of segment `n`.
    pub fn segment_radial_range(&self, n: usize) -> Result<(f64, f64), ChannelError> {
        let s = self.segments.get(n).ok_or(ChannelError::NoSuchSegment {
            n,
            count: self.segments.len(),
        })?;
        Ok((self.radial_distance(s.d_lo), self.radial_distance(s.d_hi)))
    }

    /// 3D distances where either the gain or the LoS probability changes form.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .segments
            .iter()
            .map(|s| s.d_hi)
            .filter(|d| d.is_finite())
            .chain(self.los_prob.kinks())
            .filter(|&d| d > self.height_diff)
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Radius where an opposite-type link has the same gain as the serving
    /// link of type `signal_path` at 2D distance `r` in segment `n`.
    ///
    /// With a LoS signal this is `r1` (NLoS interferers closer than it would
    /// have been preferred); with an NLoS signal it is `r2`. Returns zero when
    /// the opposite curve never reaches the target gain.
    pub fn equal_gain_radius(
        &self,
        n: usize,
        r: f64,
        signal_path: PathType,
    ) -> Result<f64, ChannelError> {
        let (lo, hi) = self.segment_radial_range(n)?;
        let slack = 1e-12 * hi.max(1.0);
        if r < lo - slack || r > hi + slack {
            return Err(ChannelError::OutsideSegment { r, n });
        }
        Ok(self.equal_gain_radius_unchecked(n, r, signal_path))
    }

    pub(crate) fn equal_gain_radius_unchecked(
        &self,
        n: usize,
        r: f64,
        signal_path: PathType,
    ) -> f64 {
        let target = self.segment_gain(n, self.distance_3d(r), signal_path);
        self.radius_for_gain(target, signal_path.other())
    }

    /// 2D distance where the composite `path` gain equals `target`, by bisection.
    pub fn radius_for_gain(&self, target: f64, path: PathType) -> f64 {
        let w_min = self.min_distance();
        if self.gain(w_min, path) <= target {
            return 0.0;
        }
        let mut lo = w_min;
        let mut hi = (2.0 * w_min).max(1e-3);
        let mut guard = 0;
        while self.gain(hi, path) > target {
            lo = hi;
            hi *= 2.0;
            guard += 1;
            if guard > 2000 {
                return f64::INFINITY;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo < 1e-15 * hi {
                break;
            }
            if self.gain(mid, path) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.radial_distance(0.5 * (lo + hi))
    }

    /// Dense-grid audit of continuity, monotonicity and the LoS probability range.
    pub fn validate(&self) -> ModelValidationReport {
        const PER_DECADE: usize = 10_000;
        let w_min = self.min_distance();
        let w_max = (self.los_prob.transition_distance() * 100.0).max(10.0);
        let decades = (w_max / w_min).log10();
        let count = (decades * PER_DECADE as f64).ceil() as usize + 1;

        let mut max_jump: f64 = 0.0;
        let mut cont = [true, true];
        for pair in self.segments.windows(2) {
            let d = pair[0].d_hi;
            for (i, path) in [PathType::Los, PathType::Nlos].into_iter().enumerate() {
                let left = pair[0].gain(d, path);
                let right = pair[1].gain(d, path);
                let jump = (left - right).abs() / left.abs().max(right.abs());
                max_jump = max_jump.max(jump);
                if jump > 1e-9 {
                    cont[i] = false;
                }
            }
        }

        let mut mono = [true, true];
        let mut prob_range_ok = true;
        let mut prob_monotone = true;
        let mut prob_clamped = false;
        let mut los_dominates = true;
        let mut prev: Option<(f64, f64, f64)> = None;
        for i in 0..count {
            let w = w_min * 10f64.powf(i as f64 / PER_DECADE as f64);
            let g_los = self.gain(w, PathType::Los);
            let g_nlos = self.gain(w, PathType::Nlos);
            let raw = self.los_prob.raw(w);
            if !(0.0..=1.0).contains(&raw) {
                prob_clamped = true;
            }
            let p = self.los_probability(w);
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                prob_range_ok = false;
            }
            if g_los < g_nlos {
                los_dominates = false;
            }
            if let Some((pl, pn, pp)) = prev {
                if g_los >= pl {
                    mono[0] = false;
                }
                if g_nlos >= pn {
                    mono[1] = false;
                }
                if p > pp + 1e-15 {
                    prob_monotone = false;
                }
            }
            prev = Some((g_los, g_nlos, p));
        }

        ModelValidationReport {
            continuous_los: cont[0],
            continuous_nlos: cont[1],
            monotone_los: mono[0],
            monotone_nlos: mono[1],
            max_jump,
            prob_range_ok,
            prob_monotone,
            prob_clamped,
            los_dominates,
            grid_points: count,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelValidationReport {
    pub continuous_los: bool,
    pub continuous_nlos: bool,
    pub monotone_los: bool,
    pub monotone_nlos: bool,
    /// Largest relative gain discontinuity at a segment boundary.
    pub max_jump: f64,
    pub prob_range_ok: bool,
    pub prob_monotone: bool,
    /// The raw LoS probability formula left `[0, 1]` somewhere and was clamped.
    pub prob_clamped: bool,
    pub los_dominates: bool,
    pub grid_points: usize,
}

impl ModelValidationReport {
    pub fn passed(&self) -> bool {
        self.continuous_los
            && self.continuous_nlos
            && self.monotone_los
            && self.monotone_nlos
            && self.prob_range_ok
            && self.prob_monotone
    }
}

/// 3D link distance for 2D distance `r` and height difference `l`.
#[inline]
pub fn distance_3d(r: f64, l: f64) -> f64 {
    r.hypot(l)
}

/// Piecewise lower-bound approximation of `sqrt(r^2 + L^2)`.
pub fn approx_distance(r: f64, l: f64) -> f64 {
    let v1 = (std::f64::consts::SQRT_2 - 1.0) * l;
    let v2 = (std::f64::consts::SQRT_2 + 1.0) * l;
    if r <= v1 {
        l
    } else if r <= v2 {
        (r + l) / std::f64::consts::SQRT_2
    } else {
        r
    }
}

fn default_a_los_db() -> f64 {
    -103.8
}
fn default_alpha_los() -> f64 {
    2.09
}
fn default_a_nlos_db() -> f64 {
    -145.4
}
fn default_alpha_nlos() -> f64 {
    3.75
}

/// JSON model definition. Distances in meters, gains in dB at 1 km.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelSpec {
    Case1 {
        #[serde(default = "Case1Defaults::d1_m")]
        d1_m: f64,
        #[serde(flatten)]
        law: PowerLawDb,
        #[serde(default)]
        l_m: f64,
    },
    Case2 {
        #[serde(default = "Case2Defaults::r1_m")]
        r1_m: f64,
        #[serde(default = "Case2Defaults::r2_m")]
        r2_m: f64,
        #[serde(flatten)]
        law: PowerLawDb,
        #[serde(default)]
        l_m: f64,
    },
    ApproxCase2 {
        #[serde(default = "Case2Defaults::approx_d1_m")]
        d1_m: f64,
        #[serde(default = "Case2Defaults::approx_d2_m")]
        d2_m: f64,
        #[serde(flatten)]
        law: PowerLawDb,
        #[serde(default)]
        l_m: f64,
    },
    SingleSlope {
        #[serde(default = "default_a_nlos_db")]
        a_db: f64,
        #[serde(default = "default_alpha_nlos")]
        alpha: f64,
        #[serde(default)]
        l_m: f64,
    },
}

struct Case1Defaults;
impl Case1Defaults {
    fn d1_m() -> f64 {
        300.0
    }
}

struct Case2Defaults;
impl Case2Defaults {
    fn r1_m() -> f64 {
        156.0
    }
    fn r2_m() -> f64 {
        30.0
    }
    fn approx_d1_m() -> f64 {
        18.4
    }
    fn approx_d2_m() -> f64 {
        117.1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawDb {
    #[serde(default = "default_a_los_db")]
    pub a_los_db: f64,
    #[serde(default = "default_alpha_los")]
    pub alpha_los: f64,
    #[serde(default = "default_a_nlos_db")]
    pub a_nlos_db: f64,
    #[serde(default = "default_alpha_nlos")]
    pub alpha_nlos: f64,
}

impl Default for PowerLawDb {
    fn default() -> Self {
        Self {
            a_los_db: default_a_los_db(),
            alpha_los: default_alpha_los(),
            a_nlos_db: default_a_nlos_db(),
            alpha_nlos: default_alpha_nlos(),
        }
    }
}

impl From<PowerLawDb> for PowerLaw {
    fn from(p: PowerLawDb) -> Self {
        PowerLaw {
            a_los: db_to_linear(p.a_los_db),
            alpha_los: p.alpha_los,
            a_nlos: db_to_linear(p.a_nlos_db),
            alpha_nlos: p.alpha_nlos,
        }
    }
}

impl ModelSpec {
    pub fn case1() -> Self {
        ModelSpec::Case1 {
            d1_m: Case1Defaults::d1_m(),
            law: PowerLawDb::default(),
            l_m: 0.0,
        }
    }

    pub fn case2() -> Self {
        ModelSpec::Case2 {
            r1_m: Case2Defaults::r1_m(),
            r2_m: Case2Defaults::r2_m(),
            law: PowerLawDb::default(),
            l_m: 0.0,
        }
    }

    pub fn approx_case2() -> Self {
        ModelSpec::ApproxCase2 {
            d1_m: Case2Defaults::approx_d1_m(),
            d2_m: Case2Defaults::approx_d2_m(),
            law: PowerLawDb::default(),
            l_m: 0.0,
        }
    }

    pub fn single_slope() -> Self {
        ModelSpec::SingleSlope {
            a_db: default_a_nlos_db(),
            alpha: default_alpha_nlos(),
            l_m: 0.0,
        }
    }

    pub fn height_diff_m(&self) -> f64 {
        match self {
            ModelSpec::Case1 { l_m, .. }
            | ModelSpec::Case2 { l_m, .. }
            | ModelSpec::ApproxCase2 { l_m, .. }
            | ModelSpec::SingleSlope { l_m, .. } => *l_m,
        }
    }

    pub fn with_height_diff_m(mut self, l: f64) -> Self {
        match &mut self {
            ModelSpec::Case1 { l_m, .. }
            | ModelSpec::Case2 { l_m, .. }
            | ModelSpec::ApproxCase2 { l_m, .. }
            | ModelSpec::SingleSlope { l_m, .. } => *l_m = l,
        }
        self
    }

    pub fn build(&self) -> Result<PathLossModel, ChannelError> {
        match *self {
            ModelSpec::Case1 { d1_m, law, l_m } => {
                PathLossModel::case1(meters_to_km(d1_m), law.into(), meters_to_km(l_m))
            }
            ModelSpec::Case2 {
                r1_m,
                r2_m,
                law,
                l_m,
            } => PathLossModel::case2(
                meters_to_km(r1_m),
                meters_to_km(r2_m),
                law.into(),
                meters_to_km(l_m),
            ),
            ModelSpec::ApproxCase2 {
                d1_m,
                d2_m,
                law,
                l_m,
            } => PathLossModel::approx_case2(
                meters_to_km(d1_m),
                meters_to_km(d2_m),
                law.into(),
                meters_to_km(l_m),
            ),
            ModelSpec::SingleSlope { a_db, alpha, l_m } => {
                PathLossModel::single_slope(db_to_linear(a_db), alpha, meters_to_km(l_m))
            }
        }
    }
}
