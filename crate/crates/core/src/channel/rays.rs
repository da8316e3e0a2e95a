//! Simplified ray enumeration in a box city: line of sight, wall penetration,
//! and single-bounce specular reflection off vertical faces.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::scene::{Building, CityMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RayKind {
    Penetration,
    LineOfSight,
    Reflection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    pub kind: RayKind,
    pub path_length: f64,
    /// Propagation loss of this ray in dB, excluding the basic loss `L_B`.
    pub loss_db: f64,
    /// Phase delay in [0, 2π).
    pub phase: f64,
    /// Unit vector leaving the transmitter.
    pub departure: Vector3<f64>,
    /// Unit vector from the receiver toward where the ray arrives from.
    pub arrival: Vector3<f64>,
}

impl Ray {
    /// `(zenith, azimuth)` in radians of the departure direction.
    pub fn departure_angles(&self) -> (f64, f64) {
        angles(&self.departure)
    }

    pub fn arrival_angles(&self) -> (f64, f64) {
        angles(&self.arrival)
    }
}

fn angles(v: &Vector3<f64>) -> (f64, f64) {
    (v.z.clamp(-1.0, 1.0).acos(), v.y.atan2(v.x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    pub wavelength_m: f64,
    pub reflections: bool,
    pub reflection_loss_db: f64,
    /// Per-class wall penetration loss, indexed by `Building::wall_class`.
    pub wall_loss_db: Vec<f64>,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            wavelength_m: crate::consts::SPEED_OF_LIGHT / 3.4e9,
            reflections: true,
            reflection_loss_db: 6.0,
            wall_loss_db: vec![15.0],
        }
    }
}

impl TraceOptions {
    fn wall_loss(&self, class: usize) -> f64 {
        self.wall_loss_db
            .get(class)
            .or_else(|| self.wall_loss_db.last())
            .copied()
            .unwrap_or(0.0)
    }
}

/// Free-space path loss `20 log10(4π d / λ)`.
pub fn free_space_loss_db(distance_m: f64, wavelength_m: f64) -> f64 {
    20.0 * (4.0 * PI * distance_m / wavelength_m).log10()
}

fn phase_of(length: f64, wavelength: f64) -> f64 {
    (2.0 * PI * length / wavelength).rem_euclid(2.0 * PI)
}

/// Parametric overlap `(t_enter, t_exit)` of segment `a + t (b - a)`,
/// `t ∈ [0, 1]`, with the open interior of a building box.
fn segment_box_overlap(a: &Vector3<f64>, b: &Vector3<f64>, bld: &Building) -> Option<(f64, f64)> {
    let lo = [bld.x, bld.y, 0.0];
    let hi = [bld.x + bld.w, bld.y + bld.d, bld.h];
    let d = b - a;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for ax in 0..3 {
        if d[ax].abs() < 1e-12 {
            if a[ax] <= lo[ax] || a[ax] >= hi[ax] {
                return None;
            }
            continue;
        }
        let inv = 1.0 / d[ax];
        let (mut ta, mut tb) = ((lo[ax] - a[ax]) * inv, (hi[ax] - a[ax]) * inv);
        if ta > tb {
            std::mem::swap(&mut ta, &mut tb);
        }
        t0 = t0.max(ta);
        t1 = t1.min(tb);
        if t0 >= t1 {
            return None;
        }
    }
    // Touching a face (zero-length overlap in meters) is not a blockage.
    if (t1 - t0) * d.norm() < 1e-6 {
        return None;
    }
    Some((t0, t1))
}

/// Index of the first building the segment passes through, if any.
pub fn first_blocker(city: &CityMap, a: &Vector3<f64>, b: &Vector3<f64>) -> Option<usize> {
    // Quick reject on height: boxes start at ground level.
    let mut best: Option<(f64, usize)> = None;
    for (i, bld) in city.buildings.iter().enumerate() {
        if a.z >= bld.h && b.z >= bld.h {
            continue;
        }
        if let Some((t0, _)) = segment_box_overlap(a, b, bld) {
            if best.map_or(true, |(bt, _)| t0 < bt) {
                best = Some((t0, i));
            }
        }
    }
    best.map(|(_, i)| i)
}

pub fn is_blocked(city: &CityMap, a: &Vector3<f64>, b: &Vector3<f64>) -> bool {
    city.buildings.iter().any(|bld| {
        !(a.z >= bld.h && b.z >= bld.h) && segment_box_overlap(a, b, bld).is_some()
    })
}

struct Face {
    /// 0 for faces of constant x, 1 for constant y.
    axis: usize,
    coord: f64,
    /// +1 when the outward normal points along +axis.
    outward: f64,
    span: (f64, f64),
    height: f64,
}

fn faces(b: &Building) -> [Face; 4] {
    [
        Face { axis: 0, coord: b.x, outward: -1.0, span: (b.y, b.y + b.d), height: b.h },
        Face { axis: 0, coord: b.x + b.w, outward: 1.0, span: (b.y, b.y + b.d), height: b.h },
        Face { axis: 1, coord: b.y, outward: -1.0, span: (b.x, b.x + b.w), height: b.h },
        Face { axis: 1, coord: b.y + b.d, outward: 1.0, span: (b.x, b.x + b.w), height: b.h },
    ]
}

/// Enumerates rays from `tx` to `rx`, returned in canonical order
/// (kind, then path length).
pub fn trace_rays(city: &CityMap, tx: &Vector3<f64>, rx: &Vector3<f64>, opts: &TraceOptions) -> Vec<Ray> {
    let lambda = opts.wavelength_m;
    let diff = rx - tx;
    let d = diff.norm();
    let dep = diff / d;
    let arr = -dep;
    let mut rays = Vec::with_capacity(4);

    let blocker = first_blocker(city, tx, rx);
    let fs = free_space_loss_db(d, lambda);
    let wall_class = blocker.map_or(0, |i| city.buildings[i].wall_class);
    rays.push(Ray {
        kind: RayKind::Penetration,
        path_length: d,
        loss_db: fs + 2.0 * opts.wall_loss(wall_class),
        phase: phase_of(d, lambda),
        departure: dep,
        arrival: arr,
    });
    if blocker.is_none() {
        rays.push(Ray {
            kind: RayKind::LineOfSight,
            path_length: d,
            loss_db: fs,
            phase: phase_of(d, lambda),
            departure: dep,
            arrival: arr,
        });
    }

    if opts.reflections {
        for bld in &city.buildings {
            for f in faces(bld) {
                let a = f.axis;
                if (tx[a] - f.coord) * f.outward <= 0.0 || (rx[a] - f.coord) * f.outward <= 0.0 {
                    continue;
                }
                let mut image = *tx;
                image[a] = 2.0 * f.coord - tx[a];
                let s = (f.coord - rx[a]) / (image[a] - rx[a]);
                let p = rx + (image - rx) * s;
                let other = 1 - a;
                if p[other] < f.span.0 || p[other] > f.span.1 || p.z < 0.0 || p.z > f.height {
                    continue;
                }
                if is_blocked(city, tx, &p) || is_blocked(city, &p, rx) {
                    continue;
                }
                let len = (image - rx).norm();
                rays.push(Ray {
                    kind: RayKind::Reflection,
                    path_length: len,
                    loss_db: free_space_loss_db(len, lambda) + opts.reflection_loss_db,
                    phase: phase_of(len, lambda),
                    departure: (p - tx).normalize(),
                    arrival: (p - rx).normalize(),
                });
            }
        }
    }
    rays.sort_by(|a, b| {
        a.kind
            .cmp(&b.kind)
            .then(a.path_length.total_cmp(&b.path_length))
            .then(a.departure.x.total_cmp(&b.departure.x))
            .then(a.departure.y.total_cmp(&b.departure.y))
    });
    rays
}
