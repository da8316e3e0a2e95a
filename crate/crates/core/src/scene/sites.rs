use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::city::CityMap;
use super::TimeGrid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BsConfig {
    pub max_power_dbm: f64,
    pub capacity: u32,
    /// Connections held by users outside the simulation, per slot.
    pub background_load: u32,
    pub mast_height_m: f64,
    /// Roof height assumed for a segment with no buildings.
    pub empty_segment_height_m: f64,
    pub downtilt_deg: f64,
}

impl Default for BsConfig {
    fn default() -> Self {
        Self {
            max_power_dbm: 42.0,
            capacity: 20,
            background_load: 0,
            mast_height_m: 5.0,
            empty_segment_height_m: 20.0,
            downtilt_deg: 6.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseStationSite {
    pub segment: usize,
    pub position: Vector3<f64>,
    pub max_power_w: f64,
    pub capacity: u32,
    pub background_load: Vec<u32>,
    /// Sector boresight azimuth, degrees clockwise from north.
    pub sector_azimuth_deg: f64,
    pub downtilt_deg: f64,
}

impl BaseStationSite {
    pub fn validate(&self, idx: usize) -> Result<()> {
        if self.background_load.iter().any(|&l| l > self.capacity) {
            return Err(Error::config(format!("sites[{idx}].background_load"), "exceeds capacity"));
        }
        if !(self.position.z > 0.0) {
            return Err(Error::config(format!("sites[{idx}].position"), "height must be positive"));
        }
        Ok(())
    }
}

/// One site per segment on the roof centroid of its tallest building.
///
/// A segment without buildings gets a site at its center on a notional roof
/// of `empty_segment_height_m`; a warning is logged.
pub fn place_base_stations(city: &CityMap, cfg: &BsConfig, grid: &TimeGrid) -> Result<Vec<BaseStationSite>> {
    if cfg.background_load > cfg.capacity {
        return Err(Error::config("terrestrial.background_load", "exceeds capacity"));
    }
    let sites = city
        .segments
        .iter()
        .enumerate()
        .map(|(i, seg)| {
            let (x, y, roof) = match seg.tallest {
                Some(b) => {
                    let b = &city.buildings[b];
                    let (cx, cy) = b.centroid();
                    (cx, cy, b.h)
                }
                None => {
                    log::warn!("segment ({}, {}) has no buildings; placing site at its center", seg.row, seg.col);
                    let (cx, cy) = seg.bounds.center();
                    (cx, cy, cfg.empty_segment_height_m)
                }
            };
            let (sx, sy) = seg.bounds.center();
            let (dx, dy) = (sx - x, sy - y);
            let sector_azimuth_deg = if dx.hypot(dy) < 1.0 { 0.0 } else { dx.atan2(dy).to_degrees() };
            BaseStationSite {
                segment: i,
                position: Vector3::new(x, y, roof + cfg.mast_height_m),
                max_power_w: crate::consts::dbm_to_watts(cfg.max_power_dbm),
                capacity: cfg.capacity,
                background_load: vec![cfg.background_load; grid.n_slots],
                sector_azimuth_deg,
                downtilt_deg: cfg.downtilt_deg,
            }
        })
        .collect::<Vec<_>>();
    for (i, s) in sites.iter().enumerate() {
        s.validate(i)?;
    }
    Ok(sites)
}
