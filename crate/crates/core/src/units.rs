//! dB / linear conversions. Engines work in linear units with distances in km;
//! conversions happen at the configuration boundary.

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

pub fn meters_to_km(m: f64) -> f64 {
    m * 1e-3
}

pub fn km_to_meters(km: f64) -> f64 {
    km * 1e3
}
