//! Vertical antenna pattern with density-dependent downtilt. Horizontal
//! pattern is omnidirectional.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::db_to_linear;

#[derive(Debug, Error, PartialEq)]
pub enum AntennaError {
    #[error("invalid antenna parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AntennaSpec {
    /// Maximum gain (dB).
    pub g_max_db: f64,
    /// Vertical half-power beamwidth (degrees).
    pub hpbw_v_deg: f64,
    /// Cosine exponent of the vertical pattern.
    pub n_exp: f64,
    /// Vertical side-lobe floor (dB, negative).
    pub sll_v_db: f64,
    /// Tilt trade-off coefficient applied to the beamwidth.
    pub z: f64,
}

impl Default for AntennaSpec {
    fn default() -> Self {
        Self {
            g_max_db: 8.15,
            hpbw_v_deg: 19.5,
            n_exp: 47.64,
            sll_v_db: -12.0,
            z: 0.7,
        }
    }
}

impl AntennaSpec {
    pub fn validate(&self) -> Result<(), AntennaError> {
        let checks = [
            ("g_max_db", self.g_max_db, self.g_max_db >= 0.0),
            ("sll_v_db", self.sll_v_db, self.sll_v_db < 0.0),
            ("n_exp", self.n_exp, self.n_exp > 0.0),
            ("hpbw_v_deg", self.hpbw_v_deg, self.hpbw_v_deg > 0.0),
            ("z", self.z, self.z.is_finite()),
        ];
        for (name, value, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(AntennaError::InvalidParameter { name, value });
            }
        }
        Ok(())
    }
}

/// Vertical pattern offset in dB, `max(10 log10 |cos^n(theta - tilt)|, F_V)`.
pub fn vertical_offset(theta_deg: f64, tilt_deg: f64, spec: &AntennaSpec) -> f64 {
    let c = (theta_deg - tilt_deg).to_radians().cos().abs();
    if c == 0.0 {
        return spec.sll_v_db;
    }
    (10.0 * spec.n_exp * c.log10()).max(spec.sll_v_db)
}

/// Downtilt for a cell-edge UE at the mean cell radius `1/sqrt(lambda pi)`,
/// plus `z` beamwidths, clamped to 90 degrees.
pub fn downtilt_for_density(lambda: f64, l_km: f64, spec: &AntennaSpec) -> f64 {
    let r_cov = 1.0 / (lambda * std::f64::consts::PI).sqrt();
    let tilt = (l_km / r_cov).atan().to_degrees() + spec.z * spec.hpbw_v_deg;
    tilt.min(90.0)
}

/// Total gain in dB; `phi` is ignored by the omnidirectional horizontal pattern.
pub fn total_gain(_phi_deg: f64, theta_deg: f64, tilt_deg: f64, spec: &AntennaSpec) -> f64 {
    spec.g_max_db + vertical_offset(theta_deg, tilt_deg, spec)
}

/// Elevation of the UE seen from the BS, measured downward from horizontal.
pub fn elevation_deg(r_km: f64, l_km: f64) -> f64 {
    if r_km == 0.0 {
        return 90.0;
    }
    (l_km / r_km).atan().to_degrees()
}

/// Linear gain factor applied to a link at 2D distance `r_km`.
pub fn link_gain(r_km: f64, l_km: f64, tilt_deg: f64, spec: &AntennaSpec) -> f64 {
    db_to_linear(total_gain(0.0, elevation_deg(r_km, l_km), tilt_deg, spec))
}
