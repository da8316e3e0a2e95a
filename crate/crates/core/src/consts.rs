//! Physical constants shared by the geometry and link-budget code.

/// Spherical Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_378_137.0;

/// Earth gravitational parameter in m^3/s^2.
pub const MU_EARTH: f64 = 3.986_004_418e14;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Boltzmann constant in J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Reference temperature for noise figure conversion, K.
pub const T0_KELVIN: f64 = 290.0;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn dbw_to_watts(dbw: f64) -> f64 {
    10f64.powf(dbw / 10.0)
}

pub fn watts_to_dbw(w: f64) -> f64 {
    10.0 * w.log10()
}
