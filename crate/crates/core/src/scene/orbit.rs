//! Circular two-body LEO orbits.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::consts::{EARTH_RADIUS_M, MU_EARTH};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatelliteOrbit {
    pub altitude_m: f64,
    pub inclination_deg: f64,
    pub raan_deg: f64,
    /// Argument of latitude at t = 0.
    pub initial_anomaly_deg: f64,
    pub max_power_w: f64,
    pub capacity: u32,
    pub background_load: Vec<u32>,
}

impl SatelliteOrbit {
    pub fn semi_major_axis(&self) -> f64 {
        EARTH_RADIUS_M + self.altitude_m
    }

    pub fn period(&self) -> f64 {
        orbital_period(self.altitude_m)
    }

    pub fn mean_motion(&self) -> f64 {
        2.0 * PI / self.period()
    }

    pub fn validate(&self, idx: usize) -> Result<()> {
        let p = |f: &str| format!("constellation.orbits[{idx}].{f}");
        if !(self.altitude_m > 0.0) {
            return Err(Error::config(p("altitude_km"), "must be positive"));
        }
        if !(0.0..=180.0).contains(&self.inclination_deg) {
            return Err(Error::config(p("inclination_deg"), "must lie in [0, 180]"));
        }
        if self.background_load.iter().any(|&l| l > self.capacity) {
            return Err(Error::config(p("background_load"), "exceeds capacity"));
        }
        Ok(())
    }
}

/// Period of a circular orbit at `altitude_m`, seconds.
pub fn orbital_period(altitude_m: f64) -> f64 {
    let a = EARTH_RADIUS_M + altitude_m;
    2.0 * PI * (a.powi(3) / MU_EARTH).sqrt()
}

/// Earth-centered position at time `t` seconds after the epoch.
pub fn propagate_orbit(orbit: &SatelliteOrbit, t: f64) -> Vector3<f64> {
    let r = orbit.semi_major_axis();
    let u = orbit.initial_anomaly_deg.to_radians() + orbit.mean_motion() * t;
    let (su, cu) = u.sin_cos();
    let (si, ci) = orbit.inclination_deg.to_radians().sin_cos();
    let (so, co) = orbit.raan_deg.to_radians().sin_cos();
    // Rz(raan) * Rx(inc) * [r cos u, r sin u, 0]
    let (xo, yo) = (r * cu, r * su);
    let (y1, z1) = (yo * ci, yo * si);
    Vector3::new(co * xo - so * y1, so * xo + co * y1, z1)
}

/// `(raan, argument of latitude)` in degrees that put the sub-satellite point
/// at `(lat, lon)` on an ascending pass at time `t_ref`.
///
/// Requires `|lat| <= inclination` (and a non-equatorial orbit).
pub fn pass_over(lat_deg: f64, lon_deg: f64, altitude_m: f64, inclination_deg: f64, t_ref: f64) -> Result<(f64, f64)> {
    let (lat, inc) = (lat_deg.to_radians(), inclination_deg.to_radians());
    let s = lat.sin() / inc.sin();
    if !(inc.sin().abs() > 1e-12) || s.abs() > 1.0 {
        return Err(Error::config(
            "constellation.orbits",
            format!("latitude {lat_deg} is not reachable with inclination {inclination_deg}"),
        ));
    }
    let u = s.asin();
    let node_offset = (inc.cos() * u.sin()).atan2(u.cos());
    let raan = lon_deg.to_radians() - node_offset;
    let u0 = u - 2.0 * PI / orbital_period(altitude_m) * t_ref;
    Ok((raan.to_degrees().rem_euclid(360.0), u0.to_degrees().rem_euclid(360.0)))
}
