//! Earth-centered and local east-north-up frames on a spherical Earth.
//!
//! Satellite positions are expressed in an Earth-centered frame that is
//! aligned with ECEF at the start epoch and does not rotate with the Earth.
//! Over a window of a few minutes the ground moves by tens of meters in this
//! frame, which is negligible for the link geometry.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::consts::EARTH_RADIUS_M;

/// Geodetic anchor of the local scene frame (degrees, on the sphere surface).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoOrigin {
    pub lat_deg: f64,
    pub lon_deg: f64,
}

impl GeoOrigin {
    pub fn new(lat_deg: f64, lon_deg: f64) -> Self {
        Self { lat_deg, lon_deg }
    }

    /// Earth-centered position of a point at `height_m` above this origin.
    pub fn to_ecef(&self, height_m: f64) -> Vector3<f64> {
        geodetic_to_ecef(self.lat_deg, self.lon_deg, height_m)
    }
}

pub fn geodetic_to_ecef(lat_deg: f64, lon_deg: f64, height_m: f64) -> Vector3<f64> {
    let (lat, lon) = (lat_deg.to_radians(), lon_deg.to_radians());
    let r = EARTH_RADIUS_M + height_m;
    Vector3::new(r * lat.cos() * lon.cos(), r * lat.cos() * lon.sin(), r * lat.sin())
}

/// Tangent-plane frame at a [`GeoOrigin`]: x east, y north, z up.
#[derive(Debug, Clone, Copy)]
pub struct EnuFrame {
    origin_ecef: Vector3<f64>,
    /// Rows are the east, north and up unit vectors in ECEF.
    rot: Matrix3<f64>,
}

impl EnuFrame {
    pub fn new(origin: GeoOrigin) -> Self {
        let (lat, lon) = (origin.lat_deg.to_radians(), origin.lon_deg.to_radians());
        let (sl, cl) = lat.sin_cos();
        let (so, co) = lon.sin_cos();
        let rot = Matrix3::new(
            -so,
            co,
            0.0, //
            -sl * co,
            -sl * so,
            cl, //
            cl * co,
            cl * so,
            sl,
        );
        Self {
            origin_ecef: origin.to_ecef(0.0),
            rot,
        }
    }

    pub fn to_enu(&self, ecef: &Vector3<f64>) -> Vector3<f64> {
        self.rot * (ecef - self.origin_ecef)
    }

    pub fn to_ecef(&self, enu: &Vector3<f64>) -> Vector3<f64> {
        self.origin_ecef + self.rot.transpose() * enu
    }
}

/// Elevation/azimuth of a satellite as seen from a ground point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LookAngles {
    pub elevation_deg: f64,
    /// Clockwise from north, in [0, 360).
    pub azimuth_deg: f64,
    pub slant_range_m: f64,
}

/// Look angles from a UE at `ue_enu` (scene frame anchored at `origin`)
/// toward a satellite at `sat_ecef`.
///
/// Angles are measured in the scene's tangent frame, which is the frame the
/// ray tracer uses. A satellite under the horizon yields a negative elevation.
pub fn sat_look_angles(sat_ecef: &Vector3<f64>, ue_enu: &Vector3<f64>, origin: GeoOrigin) -> LookAngles {
    let frame = EnuFrame::new(origin);
    look_angles_enu(&frame.to_enu(sat_ecef), ue_enu)
}

pub(crate) fn look_angles_enu(sat_enu: &Vector3<f64>, ue_enu: &Vector3<f64>) -> LookAngles {
    let d = sat_enu - ue_enu;
    let horiz = d.x.hypot(d.y);
    let elevation_deg = d.z.atan2(horiz).to_degrees();
    let mut azimuth_deg = d.x.atan2(d.y).to_degrees();
    if azimuth_deg < 0.0 {
        azimuth_deg += 360.0;
    }
    LookAngles {
        elevation_deg,
        azimuth_deg,
        slant_range_m: d.norm(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enu_round_trip() {
        let f = EnuFrame::new(GeoOrigin::new(51.5, -0.1));
        let p = Vector3::new(120.0, -35.0, 18.0);
        let back = f.to_enu(&f.to_ecef(&p));
        assert!((back - p).norm() < 1e-6);
    }

    #[test]
    fn zenith_and_overhead_range() {
        let o = GeoOrigin::new(51.5, -0.1);
        let sat = o.to_ecef(500e3);
        let la = sat_look_angles(&sat, &Vector3::zeros(), o);
        assert!((la.elevation_deg - 90.0).abs() < 1e-9);
        assert!((la.slant_range_m - 500e3).abs() < 1.0);
    }

    #[test]
    fn offset_elevation_matches_spherical_triangle() {
        // Sub-satellite point 500 km north along the meridian.
        let o = GeoOrigin::new(10.0, 20.0);
        let central = 500e3 / EARTH_RADIUS_M;
        let sat = geodetic_to_ecef(10.0 + central.to_degrees(), 20.0, 500e3);
        let la = sat_look_angles(&sat, &Vector3::zeros(), o);
        let r = EARTH_RADIUS_M / (EARTH_RADIUS_M + 500e3);
        let oracle = ((central.cos() - r) / central.sin()).atan().to_degrees();
        assert!((la.elevation_deg - oracle).abs() < 1e-9);
        assert!((la.elevation_deg - 41.6).abs() < 0.05);
        assert!(la.azimuth_deg.abs() < 1e-6 || (la.azimuth_deg - 360.0).abs() < 1e-6);
    }
}
