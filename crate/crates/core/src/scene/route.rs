//! UE waypoint routes and their per-slot sampling.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::city::CityMap;
use super::TimeGrid;
use crate::error::{Error, Result};

/// Route-file record: `{t, x, y, z}` (seconds, scene meters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Waypoint {
    fn pos(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UERoute {
    pub waypoints: Vec<Waypoint>,
    pub antenna_mount_height: f64,
}

impl UERoute {
    /// Parses a JSON list of `{t, x, y, z}` records.
    pub fn from_json(s: &str) -> Result<Self> {
        let waypoints: Vec<Waypoint> = serde_json::from_str(s)?;
        let antenna_mount_height = waypoints.first().map_or(0.0, |w| w.z);
        let r = Self {
            waypoints,
            antenna_mount_height,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.waypoints)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.waypoints.is_empty() {
            return Err(Error::config("route", "route has no waypoints"));
        }
        if self.waypoints.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::config("route", "waypoint times must be strictly increasing"));
        }
        Ok(())
    }

    pub fn span(&self) -> (f64, f64) {
        (self.waypoints[0].t, self.waypoints[self.waypoints.len() - 1].t)
    }

    /// Largest segment speed in m/s.
    pub fn max_speed(&self) -> f64 {
        self.waypoints
            .windows(2)
            .map(|w| (w[1].pos() - w[0].pos()).norm() / (w[1].t - w[0].t))
            .fold(0.0, f64::max)
    }

    /// Piecewise-linear position at time `t`.
    pub fn position_at(&self, t: f64) -> Result<Vector3<f64>> {
        let (start, end) = self.span();
        if !(t >= start && t <= end) {
            return Err(Error::OutOfRange { t, start, end });
        }
        let wp = &self.waypoints;
        let i = wp.partition_point(|w| w.t <= t);
        if i == wp.len() {
            return Ok(wp[wp.len() - 1].pos());
        }
        let (a, b) = (&wp[i - 1], &wp[i]);
        let s = (t - a.t) / (b.t - a.t);
        Ok(a.pos() + (b.pos() - a.pos()) * s)
    }
}

/// One position per slot, evaluated at slot midpoints.
pub fn sample_route(route: &UERoute, grid: &TimeGrid) -> Result<Vec<Vector3<f64>>> {
    (0..grid.n_slots).map(|s| route.position_at(grid.midpoint(s))).collect()
}

/// Random walk along the street network of a generated city.
///
/// Streets follow lot boundaries (`lots_per_segment` lots per segment axis).
/// The walker never immediately reverses unless it reaches a dead end, and
/// the resulting route covers `[grid.start, grid.end]`.
pub fn street_walk(
    city: &CityMap,
    lots_per_segment: usize,
    grid: &TimeGrid,
    speed_mps: f64,
    mount_height: f64,
    seed: u64,
) -> Result<UERoute> {
    if !(speed_mps >= 0.0) {
        return Err(Error::config("ue.speed_mps", "must be non-negative"));
    }
    let nx = city.seg_cols * lots_per_segment;
    let ny = city.seg_rows * lots_per_segment;
    let (dx, dy) = (city.size_m[0] / nx as f64, city.size_m[1] / ny as f64);
    let node = |i: usize, j: usize| (i as f64 * dx, j as f64 * dy);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut i, mut j) = (rng.gen_range(1..nx.max(2)), rng.gen_range(1..ny.max(2)));
    i = i.min(nx);
    j = j.min(ny);
    let mut t = grid.start_epoch;
    let (x, y) = node(i, j);
    let mut waypoints = vec![Waypoint { t, x, y, z: mount_height }];
    let end = grid.end();
    if speed_mps == 0.0 {
        waypoints.push(Waypoint { t: end.max(t + 1.0), x, y, z: mount_height });
        return Ok(UERoute { waypoints, antenna_mount_height: mount_height });
    }

    let mut last: Option<(i64, i64)> = None;
    while t < end {
        let dirs: Vec<(i64, i64)> = [(1, 0), (-1, 0), (0, 1), (0, -1)]
            .into_iter()
            .filter(|&(di, dj)| {
                let (ni, nj) = (i as i64 + di, j as i64 + dj);
                ni >= 0 && nj >= 0 && ni <= nx as i64 && nj <= ny as i64
            })
            .collect();
        let forward: Vec<_> = dirs.iter().copied().filter(|&d| Some((-d.0, -d.1)) != last).collect();
        let pool = if forward.is_empty() { &dirs } else { &forward };
        let d = pool[rng.gen_range(0..pool.len())];
        i = (i as i64 + d.0) as usize;
        j = (j as i64 + d.1) as usize;
        last = Some(d);
        let leg = if d.0 != 0 { dx } else { dy };
        t += leg / speed_mps;
        let (x, y) = node(i, j);
        waypoints.push(Waypoint { t, x, y, z: mount_height });
    }
    Ok(UERoute {
        waypoints,
        antenna_mount_height: mount_height,
    })
}
