//! Synthetic box-building city split into lat/lon map segments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::frame::GeoOrigin;
use crate::consts::EARTH_RADIUS_M;
use crate::error::{Error, Result};

/// Axis-aligned box: footprint `[x, x+w] × [y, y+d]` in scene meters, height `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Building {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub d: f64,
    pub h: f64,
    /// Index into the channel's wall-loss table.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub wall_class: usize,
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

impl Building {
    pub fn centroid(&self) -> (f64, f64) {
        (self.x + 0.5 * self.w, self.y + 0.5 * self.d)
    }

    fn validate(&self, idx: usize) -> Result<()> {
        let path = format!("buildings[{idx}]");
        if !(self.h > 0.0) {
            return Err(Error::config(path, "height must be positive"));
        }
        if !(self.w > 0.0 && self.d > 0.0) {
            return Err(Error::config(path, "footprint must have positive area"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn depth(&self) -> f64 {
        self.y1 - self.y0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// Row index counted from the southern edge.
    pub row: usize,
    pub col: usize,
    pub bounds: Rect,
    /// Buildings whose footprint centroid falls in this segment.
    pub buildings: Vec<usize>,
    /// Tallest building (ties: smallest footprint origin).
    pub tallest: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CityMap {
    /// South-west corner of the area.
    pub origin: GeoOrigin,
    /// `[lat, lon]` extent in degrees.
    pub extent_deg: [f64; 2],
    /// `[lat, lon]` segment size in degrees.
    pub segment_deg: [f64; 2],
    /// `[east, north]` size of the area in meters.
    pub size_m: [f64; 2],
    pub seg_rows: usize,
    pub seg_cols: usize,
    pub buildings: Vec<Building>,
    /// Row-major from the south-west segment.
    pub segments: Vec<Segment>,
}

/// Parameters for [`generate_city`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CityParams {
    pub seed: u64,
    pub origin: GeoOrigin,
    pub extent_deg: [f64; 2],
    pub segment_deg: [f64; 2],
    /// Probability that a lot holds a building.
    pub density: f64,
    pub height_range_m: [f64; 2],
    /// Lots per segment along each axis; streets run along lot boundaries.
    pub lots_per_segment: usize,
    pub street_width_m: f64,
}

impl Default for CityParams {
    fn default() -> Self {
        Self {
            seed: 1,
            origin: GeoOrigin::new(51.5115, -0.1022),
            extent_deg: [0.015, 0.015],
            segment_deg: [0.005, 0.005],
            density: 0.6,
            height_range_m: [10.0, 45.0],
            lots_per_segment: 4,
            street_width_m: 14.0,
        }
    }
}

/// Meters per degree of latitude and of longitude at the area's center.
fn meters_per_degree(origin: GeoOrigin, extent_deg: [f64; 2]) -> (f64, f64) {
    let north = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;
    let lat_c = (origin.lat_deg + 0.5 * extent_deg[0]).to_radians();
    (north, north * lat_c.cos())
}

fn tiles(extent: f64, seg: f64, path: &str) -> Result<usize> {
    if !(extent > 0.0) {
        return Err(Error::config(path, "extent must have positive size"));
    }
    if !(seg > 0.0) {
        return Err(Error::config(path, "segment size must be positive"));
    }
    let n = (extent / seg).round();
    if n < 1.0 || (n * seg - extent).abs() > 1e-9 * extent.max(1.0) {
        return Err(Error::config(
            path,
            format!("segment size {seg} does not tile extent {extent}"),
        ));
    }
    Ok(n as usize)
}

impl CityMap {
    /// Builds a city from an explicit building list (the JSON import path).
    pub fn from_buildings(
        origin: GeoOrigin,
        extent_deg: [f64; 2],
        segment_deg: [f64; 2],
        buildings: Vec<Building>,
    ) -> Result<Self> {
        let seg_rows = tiles(extent_deg[0], segment_deg[0], "scene.extent_deg[0]")?;
        let seg_cols = tiles(extent_deg[1], segment_deg[1], "scene.extent_deg[1]")?;
        let (m_lat, m_lon) = meters_per_degree(origin, extent_deg);
        let size_m = [extent_deg[1] * m_lon, extent_deg[0] * m_lat];
        let (seg_w, seg_d) = (size_m[0] / seg_cols as f64, size_m[1] / seg_rows as f64);

        let area = Rect {
            x0: 0.0,
            y0: 0.0,
            x1: size_m[0],
            y1: size_m[1],
        };
        for (i, b) in buildings.iter().enumerate() {
            b.validate(i)?;
            let eps = 1e-6;
            if b.x < -eps || b.y < -eps || b.x + b.w > area.x1 + eps || b.y + b.d > area.y1 + eps {
                return Err(Error::config(format!("buildings[{i}]"), "building lies outside the city extent"));
            }
        }

        let mut segments = Vec::with_capacity(seg_rows * seg_cols);
        for row in 0..seg_rows {
            for col in 0..seg_cols {
                // Last row/col snap to the exact extent so the grid tiles it.
                let x1 = if col + 1 == seg_cols { size_m[0] } else { (col + 1) as f64 * seg_w };
                let y1 = if row + 1 == seg_rows { size_m[1] } else { (row + 1) as f64 * seg_d };
                segments.push(Segment {
                    row,
                    col,
                    bounds: Rect {
                        x0: col as f64 * seg_w,
                        y0: row as f64 * seg_d,
                        x1,
                        y1,
                    },
                    buildings: Vec::new(),
                    tallest: None,
                });
            }
        }
        for (i, b) in buildings.iter().enumerate() {
            let (cx, cy) = b.centroid();
            let col = ((cx / seg_w) as usize).min(seg_cols - 1);
            let row = ((cy / seg_d) as usize).min(seg_rows - 1);
            segments[row * seg_cols + col].buildings.push(i);
        }
        for seg in &mut segments {
            seg.tallest = tallest_of(&buildings, &seg.buildings);
        }

        Ok(Self {
            origin,
            extent_deg,
            segment_deg,
            size_m,
            seg_rows,
            seg_cols,
            buildings,
            segments,
        })
    }

    pub fn bounds(&self) -> Rect {
        Rect {
            x0: 0.0,
            y0: 0.0,
            x1: self.size_m[0],
            y1: self.size_m[1],
        }
    }

    /// Ground point at the middle of the area.
    pub fn center(&self) -> (f64, f64) {
        (0.5 * self.size_m[0], 0.5 * self.size_m[1])
    }

    /// Same geometry without any buildings.
    pub fn without_buildings(&self) -> Self {
        Self::from_buildings(self.origin, self.extent_deg, self.segment_deg, Vec::new())
            .expect("geometry already validated")
    }

    pub fn buildings_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.buildings)?)
    }
}

fn tallest_of(buildings: &[Building], idx: &[usize]) -> Option<usize> {
    idx.iter().copied().reduce(|best, i| {
        let (a, b) = (&buildings[best], &buildings[i]);
        let taller = b.h > a.h;
        let tie_smaller = b.h == a.h && (b.x, b.y) < (a.x, a.y);
        if taller || tie_smaller {
            i
        } else {
            best
        }
    })
}

/// Generates a deterministic box city on a jittered lot grid.
///
/// Every segment is split into `lots_per_segment²` lots. Each lot receives a
/// building with probability `density`; the building is inset from the lot
/// edges by half a street width so buildings never overlap and the lot
/// boundaries stay clear as streets.
pub fn generate_city(p: &CityParams) -> Result<CityMap> {
    if !(0.0..=1.0).contains(&p.density) {
        return Err(Error::config("scene.density", "density must lie in [0, 1]"));
    }
    let [h_lo, h_hi] = p.height_range_m;
    if !(h_lo > 0.0 && h_lo <= h_hi) {
        return Err(Error::config("scene.height_range_m", "need 0 < min <= max"));
    }
    if p.lots_per_segment == 0 {
        return Err(Error::config("scene.lots_per_segment", "must be at least 1"));
    }
    let empty = CityMap::from_buildings(p.origin, p.extent_deg, p.segment_deg, Vec::new())?;
    let seg_w = empty.size_m[0] / empty.seg_cols as f64;
    let seg_d = empty.size_m[1] / empty.seg_rows as f64;
    let lots = p.lots_per_segment;
    let (lot_w, lot_d) = (seg_w / lots as f64, seg_d / lots as f64);
    let half_street = 0.5 * p.street_width_m;
    if lot_w <= p.street_width_m || lot_d <= p.street_width_m {
        return Err(Error::config("scene.street_width_m", "streets are wider than the lots"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut buildings = Vec::new();
    for row in 0..empty.seg_rows * lots {
        for col in 0..empty.seg_cols * lots {
            // Draw a fixed number of variates per lot so the stream stays aligned.
            let occupied: f64 = rng.gen();
            let fw: f64 = rng.gen_range(0.6..=1.0);
            let fd: f64 = rng.gen_range(0.6..=1.0);
            let ox: f64 = rng.gen();
            let oy: f64 = rng.gen();
            let h: f64 = if h_lo == h_hi { h_lo } else { rng.gen_range(h_lo..h_hi) };
            if occupied >= p.density {
                continue;
            }
            let avail_w = lot_w - p.street_width_m;
            let avail_d = lot_d - p.street_width_m;
            let (w, d) = (fw * avail_w, fd * avail_d);
            buildings.push(Building {
                x: col as f64 * lot_w + half_street + ox * (avail_w - w),
                y: row as f64 * lot_d + half_street + oy * (avail_d - d),
                w,
                d,
                h: h.round(),
                wall_class: 0,
            });
        }
    }
    CityMap::from_buildings(p.origin, p.extent_deg, p.segment_deg, buildings)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_density_is_empty() {
        let c = generate_city(&CityParams {
            density: 0.0,
            ..Default::default()
        })
        .unwrap();
        assert!(c.buildings.is_empty());
        assert!(c.segments.iter().all(|s| s.tallest.is_none()));
    }

    #[test]
    fn full_area_has_forty_segments() {
        let c = generate_city(&CityParams {
            extent_deg: [0.02, 0.05],
            segment_deg: [0.005, 0.005],
            ..Default::default()
        })
        .unwrap();
        assert_eq!((c.seg_rows, c.seg_cols), (4, 10));
        assert_eq!(c.segments.len(), 40);
    }

    #[test]
    fn same_seed_same_city() {
        let p = CityParams::default();
        let a = serde_json::to_vec(&generate_city(&p).unwrap()).unwrap();
        let b = serde_json::to_vec(&generate_city(&p).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_area_extent_rejected() {
        let err = generate_city(&CityParams {
            extent_deg: [0.0, 0.01],
            ..Default::default()
        })
        .unwrap_err();
        assert!(matches!(err, Error::InvalidConfig { .. }));
    }

    #[test]
    fn non_tiling_segment_rejected() {
        assert!(generate_city(&CityParams {
            segment_deg: [0.004, 0.005],
            ..Default::default()
        })
        .is_err());
    }

    #[test]
    fn buildings_disjoint_and_inside_their_segment() {
        let c = generate_city(&CityParams {
            density: 0.9,
            ..Default::default()
        })
        .unwrap();
        for (i, a) in c.buildings.iter().enumerate() {
            for b in &c.buildings[i + 1..] {
                let overlap = a.x < b.x + b.w && b.x < a.x + a.w && a.y < b.y + b.d && b.y < a.y + a.d;
                assert!(!overlap);
            }
        }
        for s in &c.segments {
            for &i in &s.buildings {
                let b = &c.buildings[i];
                assert!(s.bounds.contains(b.x, b.y) && s.bounds.contains(b.x + b.w, b.y + b.d));
            }
        }
    }

    #[test]
    fn tallest_tie_breaks_on_footprint_origin() {
        let bs = vec![
            Building { x: 50.0, y: 10.0, w: 5.0, d: 5.0, h: 30.0, wall_class: 0 },
            Building { x: 20.0, y: 40.0, w: 5.0, d: 5.0, h: 30.0, wall_class: 0 },
            Building { x: 20.0, y: 60.0, w: 5.0, d: 5.0, h: 12.0, wall_class: 0 },
        ];
        let c = CityMap::from_buildings(GeoOrigin::new(51.5, 0.0), [0.005, 0.005], [0.005, 0.005], bs).unwrap();
        assert_eq!(c.segments[0].tallest, Some(1));
    }
}
