//! Analytic gain patterns for the satellite dish, the BS sector and the UE
//! rooftop patch array.
//!
//! Pattern functions take angles in the antenna's own frame. The [`Antenna`]
//! trait adapts a mounted pattern to scene directions: callers pass the unit
//! vector, in scene ENU coordinates, pointing from the antenna along the ray.

mod bessel;

pub use bessel::bessel_j1;

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::consts::SPEED_OF_LIGHT;

/// First zero of J1.
pub const J1_FIRST_ZERO: f64 = 3.831_705_970_207_512;

pub trait Antenna: Sync {
    /// Gain in dBi toward the unit direction `dir` (scene ENU).
    fn gain_dbi(&self, dir: &Vector3<f64>) -> f64;
}

/// Direction-independent gain.
#[derive(Debug, Clone, Copy)]
pub struct Isotropic(pub f64);

impl Antenna for Isotropic {
    fn gain_dbi(&self, _dir: &Vector3<f64>) -> f64 {
        self.0
    }
}

// ---------------------------------------------------------------------------
// Satellite: circular aperture
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SatPattern {
    pub max_gain_dbi: f64,
    pub aperture_radius_m: f64,
    pub wavelength_m: f64,
    /// Gains more than this far below the peak are clamped (negative dB).
    pub floor_rel_db: f64,
}

impl Default for SatPattern {
    fn default() -> Self {
        Self {
            max_gain_dbi: 30.0,
            aperture_radius_m: 1.0,
            wavelength_m: SPEED_OF_LIGHT / 3.4e9,
            floor_rel_db: -60.0,
        }
    }
}

impl SatPattern {
    /// Normalized aperture argument `u = ka sin(theta)`.
    pub fn u(&self, theta: f64) -> f64 {
        2.0 * PI * self.aperture_radius_m / self.wavelength_m * theta.sin()
    }
}

/// Aperture gain `G(θ) = Gmax + 10 log10(4 |J1(u)/u|²)`, clamped at the floor.
pub fn sat_gain(p: &SatPattern, theta: f64) -> f64 {
    let theta = theta.abs();
    if theta > FRAC_PI_2 {
        return p.max_gain_dbi + p.floor_rel_db;
    }
    let u = p.u(theta);
    let rel = if u < 1e-8 {
        0.0
    } else {
        let r = 2.0 * bessel_j1(u) / u;
        10.0 * (r * r).log10()
    };
    p.max_gain_dbi + rel.max(p.floor_rel_db)
}

/// Satellite antenna whose boresight is steered along `boresight`.
#[derive(Debug, Clone)]
pub struct SteeredSat<'a> {
    pub pattern: &'a SatPattern,
    pub boresight: Vector3<f64>,
}

impl Antenna for SteeredSat<'_> {
    fn gain_dbi(&self, dir: &Vector3<f64>) -> f64 {
        let c = dir.dot(&self.boresight).clamp(-1.0, 1.0);
        sat_gain(self.pattern, c.acos())
    }
}

// ---------------------------------------------------------------------------
// Base station: sectored macro pattern
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BsPattern {
    pub max_gain_dbi: f64,
    pub az_3db_deg: f64,
    pub el_3db_deg: f64,
    pub a_max_db: f64,
    pub sla_v_db: f64,
    /// Degrees clockwise from north.
    pub sector_azimuth_deg: f64,
    /// Degrees below the horizon.
    pub downtilt_deg: f64,
}

impl Default for BsPattern {
    fn default() -> Self {
        Self {
            max_gain_dbi: 17.0,
            az_3db_deg: 65.0,
            el_3db_deg: 10.0,
            a_max_db: 30.0,
            sla_v_db: 30.0,
            sector_azimuth_deg: 0.0,
            downtilt_deg: 6.0,
        }
    }
}

fn wrap_deg(a: f64) -> f64 {
    let w = (a + 180.0).rem_euclid(360.0) - 180.0;
    if w == -180.0 {
        180.0
    } else {
        w
    }
}

/// Sector gain at `azimuth` (clockwise from north) and `depression` (degrees
/// below the horizon, so boresight sits at `depression == downtilt`).
pub fn bs_gain(p: &BsPattern, azimuth_deg: f64, depression_deg: f64) -> f64 {
    let daz = wrap_deg(azimuth_deg - p.sector_azimuth_deg);
    let a_h = -(12.0 * (daz / p.az_3db_deg).powi(2)).min(p.a_max_db);
    let a_v = -(12.0 * ((depression_deg - p.downtilt_deg) / p.el_3db_deg).powi(2)).min(p.sla_v_db);
    p.max_gain_dbi - (-(a_h + a_v)).min(p.a_max_db)
}

impl Antenna for BsPattern {
    fn gain_dbi(&self, dir: &Vector3<f64>) -> f64 {
        let az = dir.x.atan2(dir.y).to_degrees();
        let dep = -dir.z.clamp(-1.0, 1.0).asin().to_degrees();
        bs_gain(self, az, dep)
    }
}

// ---------------------------------------------------------------------------
// UE: planar patch array facing the zenith
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UePattern {
    pub rows: usize,
    pub cols: usize,
    /// Element spacing in wavelengths.
    pub spacing_wl: f64,
    /// Element power pattern exponent `q` in `cos^q(theta)`.
    pub element_exponent: f64,
    pub max_gain_dbi: f64,
    pub floor_rel_db: f64,
}

impl Default for UePattern {
    fn default() -> Self {
        Self {
            rows: 2,
            cols: 2,
            spacing_wl: 0.5,
            element_exponent: 2.0,
            max_gain_dbi: 12.0,
            floor_rel_db: -60.0,
        }
    }
}

impl UePattern {
    /// Element pattern times array factor, linear, peak 1 at boresight.
    pub fn raw_power(&self, theta: f64, phi: f64) -> f64 {
        if theta >= FRAC_PI_2 {
            return 0.0;
        }
        let element = theta.cos().max(0.0).powf(self.element_exponent);
        let (ux, uy) = (theta.sin() * phi.cos(), theta.sin() * phi.sin());
        let k = 2.0 * PI * self.spacing_wl;
        let mut af = Complex64::new(0.0, 0.0);
        for r in 0..self.rows {
            for c in 0..self.cols {
                af += Complex64::from_polar(1.0, k * (c as f64 * ux + r as f64 * uy));
            }
        }
        let n = (self.rows * self.cols) as f64;
        element * af.norm_sqr() / (n * n)
    }
}

/// A [`UePattern`] with its normalization resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct UeArray {
    pub pattern: UePattern,
    /// dB offset so that the pattern peak equals `max_gain_dbi`.
    pub norm_db: f64,
}

impl UeArray {
    /// Normalizes numerically over a 0.5° sweep of the upper hemisphere.
    pub fn new(pattern: UePattern) -> Self {
        let mut peak = 0.0f64;
        for i in 0..=180 {
            let theta = i as f64 * 0.5f64.to_radians();
            for j in 0..720 {
                let phi = j as f64 * 0.5f64.to_radians();
                peak = peak.max(pattern.raw_power(theta, phi));
            }
        }
        let norm_db = pattern.max_gain_dbi - 10.0 * peak.log10();
        Self { pattern, norm_db }
    }
}

/// Gain at zenith angle `theta` and azimuth `phi` (radians, array frame).
pub fn ue_gain(a: &UeArray, theta: f64, phi: f64) -> f64 {
    let p = a.pattern.raw_power(theta.abs(), phi);
    let floor = a.pattern.max_gain_dbi + a.pattern.floor_rel_db;
    if p <= 0.0 {
        return floor;
    }
    (a.norm_db + 10.0 * p.log10()).max(floor)
}

impl Antenna for UeArray {
    fn gain_dbi(&self, dir: &Vector3<f64>) -> f64 {
        let theta = dir.z.clamp(-1.0, 1.0).acos();
        let phi = dir.y.atan2(dir.x);
        ue_gain(self, theta, phi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sat_boresight_and_first_null() {
        let p = SatPattern::default();
        assert_eq!(sat_gain(&p, 0.0), p.max_gain_dbi);
        let theta = (J1_FIRST_ZERO / (2.0 * PI * p.aperture_radius_m / p.wavelength_m)).asin();
        assert!((sat_gain(&p, theta) - (p.max_gain_dbi + p.floor_rel_db)).abs() < 1e-9);
    }

    #[test]
    fn sat_gain_at_u_1_6() {
        let p = SatPattern::default();
        let theta = (1.6 / (2.0 * PI * p.aperture_radius_m / p.wavelength_m)).asin();
        // J1(1.6) = 0.5698959; relative gain 10 log10(4 (J1/u)^2)
        let j = 0.569_895_935_4f64;
        let oracle = 10.0 * (4.0 * (j / 1.6).powi(2)).log10();
        let rel = sat_gain(&p, theta) - p.max_gain_dbi;
        assert!((rel - oracle).abs() < 1e-8);
        assert!((rel + 3.0).abs() < 0.1);
    }

    #[test]
    fn sat_main_lobe_monotone_and_even() {
        let p = SatPattern::default();
        let k = 2.0 * PI * p.aperture_radius_m / p.wavelength_m;
        let mut prev = f64::INFINITY;
        for i in 0..=2000 {
            let u = J1_FIRST_ZERO * i as f64 / 2000.0;
            let g = sat_gain(&p, (u / k).asin());
            assert!(g <= prev + 1e-12);
            prev = g;
        }
        assert_eq!(sat_gain(&p, -0.01), sat_gain(&p, 0.01));
    }

    #[test]
    fn bs_reference_points() {
        let p = BsPattern::default();
        assert_eq!(bs_gain(&p, 0.0, p.downtilt_deg), p.max_gain_dbi);
        assert!((bs_gain(&p, p.az_3db_deg, p.downtilt_deg) - (p.max_gain_dbi - 12.0)).abs() < 1e-12);
        assert!((bs_gain(&p, 180.0, p.downtilt_deg) - (p.max_gain_dbi - 30.0)).abs() < 1e-12);
        assert_eq!(bs_gain(&p, 20.0, 3.0), bs_gain(&p, -20.0, 3.0));
    }

    #[test]
    fn bs_half_power_at_half_beamwidth() {
        // 12 (x/az_3db)^2 = 3 dB at x = az_3db / 2.
        let p = BsPattern::default();
        let g = bs_gain(&p, p.az_3db_deg / 2.0, p.downtilt_deg);
        assert!((g - (p.max_gain_dbi - 3.0)).abs() < 1e-12);
    }

    #[test]
    fn ue_boresight_and_horizon() {
        let a = UeArray::new(UePattern::default());
        assert!((ue_gain(&a, 0.0, 0.0) - 12.0).abs() < 1e-12);
        let floor = 12.0 - 60.0;
        assert_eq!(ue_gain(&a, FRAC_PI_2, 0.0), floor);
        assert_eq!(ue_gain(&a, 2.0, 1.0), floor);
    }

    #[test]
    fn ue_two_element_null() {
        // Half-wave spacing along x at grazing incidence: |1 + e^{j pi}|^2 = 0.
        let p = UePattern { rows: 1, cols: 2, element_exponent: 0.0, ..Default::default() };
        let grazing = FRAC_PI_2 - 1e-12;
        assert!(p.raw_power(grazing, 0.0) < 1e-20);
    }

    #[test]
    fn patterns_never_exceed_peak() {
        let sat = SatPattern::default();
        let bs = BsPattern::default();
        let ue = UeArray::new(UePattern::default());
        for i in 0..10_000 {
            let f = i as f64 / 9_999.0;
            assert!(sat_gain(&sat, f * FRAC_PI_2) <= sat.max_gain_dbi + 1e-9);
            assert!(bs_gain(&bs, -180.0 + 360.0 * f, -90.0 + 180.0 * f) <= bs.max_gain_dbi + 1e-9);
            let g = ue_gain(&ue, f * PI, 37.0 * f);
            assert!(g <= 12.0 + 1e-9);
        }
    }

    #[test]
    fn ue_dense_sweep_peak_matches_max_gain() {
        let ue = UeArray::new(UePattern::default());
        let mut peak = f64::NEG_INFINITY;
        for i in 0..400 {
            for j in 0..400 {
                let (t, p) = (i as f64 / 399.0 * FRAC_PI_2, j as f64 / 400.0 * 2.0 * PI);
                peak = peak.max(ue_gain(&ue, t, p));
            }
        }
        assert!((peak - 12.0).abs() <= 0.05);
    }

    #[test]
    fn mounted_directions() {
        let ue = UeArray::new(UePattern::default());
        assert!((ue.gain_dbi(&Vector3::z()) - 12.0).abs() < 1e-12);
        let bs = BsPattern { sector_azimuth_deg: 90.0, ..Default::default() };
        let tilt = bs.downtilt_deg.to_radians();
        let east_down = Vector3::new(tilt.cos(), 0.0, -tilt.sin());
        assert!((bs.gain_dbi(&east_down) - bs.max_gain_dbi).abs() < 1e-9);
        let sat = SatPattern::default();
        let steered = SteeredSat { pattern: &sat, boresight: -Vector3::z() };
        assert_eq!(steered.gain_dbi(&-Vector3::z()), sat.max_gain_dbi);
    }
}
