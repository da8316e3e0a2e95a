//! Simulation world: city, base-station sites, satellite orbits, UE routes
//! and the slot grid.
//!
//! A [`Scene`] is assembled once and then only read. Satellite positions and
//! UE positions are pre-sampled at slot midpoints so that the channel code can
//! share the scene across worker threads without recomputation.

pub mod city;
pub mod frame;
pub mod orbit;
pub mod route;
pub mod sites;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

pub use city::{generate_city, Building, CityMap, CityParams, Rect, Segment};
pub use frame::{sat_look_angles, EnuFrame, GeoOrigin, LookAngles};
pub use orbit::{orbital_period, pass_over, propagate_orbit, SatelliteOrbit};
pub use route::{sample_route, street_walk, UERoute, Waypoint};
pub use sites::{place_base_stations, BaseStationSite, BsConfig};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub n_slots: usize,
    pub slot_duration: f64,
    pub start_epoch: f64,
}

impl TimeGrid {
    pub fn new(n_slots: usize, slot_duration: f64, start_epoch: f64) -> Result<Self> {
        if n_slots == 0 {
            return Err(Error::config("scene.time.n_slots", "need at least one slot"));
        }
        if !(slot_duration > 0.0) {
            return Err(Error::config("scene.time.slot_duration_s", "must be positive"));
        }
        Ok(Self {
            n_slots,
            slot_duration,
            start_epoch,
        })
    }

    /// Time at which slot `s` geometry is evaluated.
    pub fn midpoint(&self, s: usize) -> f64 {
        self.start_epoch + (s as f64 + 0.5) * self.slot_duration
    }

    pub fn end(&self) -> f64 {
        self.start_epoch + self.n_slots as f64 * self.slot_duration
    }
}

/// Immutable, fully sampled simulation world.
#[derive(Debug, Clone)]
pub struct Scene {
    pub city: CityMap,
    pub sites: Vec<BaseStationSite>,
    pub orbits: Vec<SatelliteOrbit>,
    pub routes: Vec<UERoute>,
    pub grid: TimeGrid,
    pub frame: EnuFrame,
    /// `[ue][slot]` antenna positions in scene meters.
    pub ue_positions: Vec<Vec<Vector3<f64>>>,
    /// `[sat][slot]` positions in the scene frame.
    pub sat_positions: Vec<Vec<Vector3<f64>>>,
}

impl Scene {
    pub fn new(
        city: CityMap,
        sites: Vec<BaseStationSite>,
        orbits: Vec<SatelliteOrbit>,
        routes: Vec<UERoute>,
        grid: TimeGrid,
    ) -> Result<Self> {
        for (i, s) in sites.iter().enumerate() {
            s.validate(i)?;
            if s.background_load.len() != grid.n_slots {
                return Err(Error::Dimension(format!("site {i} background load length")));
            }
        }
        for (i, o) in orbits.iter().enumerate() {
            o.validate(i)?;
            if o.background_load.len() != grid.n_slots {
                return Err(Error::Dimension(format!("orbit {i} background load length")));
            }
        }
        let frame = EnuFrame::new(city.origin);
        let ue_positions = routes
            .iter()
            .map(|r| {
                r.validate()?;
                sample_route(r, &grid)
            })
            .collect::<Result<Vec<_>>>()?;
        let sat_positions = orbits
            .iter()
            .map(|o| {
                (0..grid.n_slots)
                    .map(|s| frame.to_enu(&propagate_orbit(o, grid.midpoint(s))))
                    .collect()
            })
            .collect();
        Ok(Self {
            city,
            sites,
            orbits,
            routes,
            grid,
            frame,
            ue_positions,
            sat_positions,
        })
    }

    pub fn n_bs(&self) -> usize {
        self.sites.len()
    }

    pub fn n_sat(&self) -> usize {
        self.orbits.len()
    }

    pub fn n_ue(&self) -> usize {
        self.routes.len()
    }

    pub fn n_slots(&self) -> usize {
        self.grid.n_slots
    }

    /// Look angles of satellite `m` from a scene point at slot `t`.
    pub fn look_angles(&self, m: usize, t: usize, from: &Vector3<f64>) -> LookAngles {
        frame::look_angles_enu(&self.sat_positions[m][t], from)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_invariants() {
        assert!(TimeGrid::new(0, 1.0, 0.0).is_err());
        assert!(TimeGrid::new(3, 0.0, 0.0).is_err());
        let g = TimeGrid::new(60, 1.0, 0.0).unwrap();
        assert_eq!(g.midpoint(0), 0.5);
        assert_eq!(g.end(), 60.0);
    }
}
