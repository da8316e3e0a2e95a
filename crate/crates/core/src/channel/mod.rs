//! Link gains between transmitters (BS sites, satellites) and UE positions,
//! the per-slot channel tensors `h`/`g`, and CINR maps.

pub mod pathloss;
pub mod rays;

use nalgebra::Vector3;
use ndarray::{Array2, Array3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use pathloss::{channel_gain, equivalent_path_loss, noise_power, BasicLoss, NoiseModel, PlMode};
pub use rays::{first_blocker, free_space_loss_db, is_blocked, trace_rays, Ray, RayKind, TraceOptions};

use crate::antenna::{BsPattern, SatPattern, SteeredSat, UeArray};
use crate::error::{Error, Result};
use crate::scene::Scene;
use crate::sysmodel::PowerAllocation;

/// Linear power gains: `h[[n, k, t]]` for BS links, `g[[m, k, t]]` for satellites.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTensor {
    pub h: Array3<f64>,
    pub g: Array3<f64>,
}

impl ChannelTensor {
    pub fn new(h: Array3<f64>, g: Array3<f64>) -> Result<Self> {
        let (hd, gd) = (h.dim(), g.dim());
        if hd.1 != gd.1 || hd.2 != gd.2 {
            return Err(Error::Dimension(format!("h is {hd:?} but g is {gd:?}")));
        }
        if h.iter().chain(g.iter()).any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Dimension("channel gains must be finite and non-negative".into()));
        }
        Ok(Self { h, g })
    }

    pub fn n_bs(&self) -> usize {
        self.h.dim().0
    }

    pub fn n_sat(&self) -> usize {
        self.g.dim().0
    }

    pub fn n_ue(&self) -> usize {
        self.h.dim().1
    }

    pub fn n_slots(&self) -> usize {
        self.h.dim().2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelOptions {
    pub trace: TraceOptions,
    pub basic: BasicLoss,
    /// Satellites below this elevation at the UE get zero gain.
    pub min_elevation_deg: f64,
    pub pl_mode: PlMode,
    pub pl_cap_db: f64,
}

impl Default for ChannelOptions {
    fn default() -> Self {
        Self {
            trace: TraceOptions::default(),
            basic: BasicLoss::default(),
            min_elevation_deg: 10.0,
            pl_mode: PlMode::Amplitude,
            pl_cap_db: 250.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Patterns {
    pub sat: SatPattern,
    /// Template; each site overrides the sector azimuth and downtilt.
    pub bs: BsPattern,
    pub ue: UeArray,
}

/// Evaluates single links over an immutable scene.
///
/// Satellite antennas are steered at the ground point in the middle of the
/// city, so every point in the area sees the satellite close to boresight.
pub struct LinkEvaluator<'a> {
    pub scene: &'a Scene,
    pub patterns: &'a Patterns,
    pub opts: ChannelOptions,
    bs_patterns: Vec<BsPattern>,
    aim: Vector3<f64>,
}

impl<'a> LinkEvaluator<'a> {
    pub fn new(scene: &'a Scene, patterns: &'a Patterns, opts: ChannelOptions) -> Self {
        let bs_patterns = scene
            .sites
            .iter()
            .map(|s| BsPattern {
                sector_azimuth_deg: s.sector_azimuth_deg,
                downtilt_deg: s.downtilt_deg,
                ..patterns.bs.clone()
            })
            .collect();
        let (cx, cy) = scene.city.center();
        Self {
            scene,
            patterns,
            opts,
            bs_patterns,
            aim: Vector3::new(cx, cy, 0.0),
        }
    }

    /// Path loss of BS `n` to a receiver at `rx`, dB.
    pub fn bs_path_loss(&self, n: usize, rx: &Vector3<f64>) -> f64 {
        let tx = self.scene.sites[n].position;
        let rays = trace_rays(&self.scene.city, &tx, rx, &self.opts.trace);
        equivalent_path_loss(
            &rays,
            &self.bs_patterns[n],
            &self.patterns.ue,
            self.opts.basic.l_b_tn_db,
            self.opts.pl_mode,
            self.opts.pl_cap_db,
        )
    }

    /// Path loss of satellite `m` at slot `t`, or `None` below the elevation mask.
    pub fn sat_path_loss(&self, m: usize, t: usize, rx: &Vector3<f64>) -> Option<f64> {
        let la = self.scene.look_angles(m, t, rx);
        if la.elevation_deg < self.opts.min_elevation_deg {
            return None;
        }
        let tx = self.scene.sat_positions[m][t];
        let ant = SteeredSat {
            pattern: &self.patterns.sat,
            boresight: (self.aim - tx).normalize(),
        };
        let rays = trace_rays(&self.scene.city, &tx, rx, &self.opts.trace);
        Some(equivalent_path_loss(
            &rays,
            &ant,
            &self.patterns.ue,
            self.opts.basic.l_b_ntn_db,
            self.opts.pl_mode,
            self.opts.pl_cap_db,
        ))
    }

    pub fn bs_gain(&self, n: usize, rx: &Vector3<f64>) -> f64 {
        channel_gain(self.bs_path_loss(n, rx))
    }

    pub fn sat_gain(&self, m: usize, t: usize, rx: &Vector3<f64>) -> f64 {
        self.sat_path_loss(m, t, rx).map_or(0.0, channel_gain)
    }
}

/// Channel gains for every (link, slot) at the sampled UE positions.
pub fn compute_channel_tensor(scene: &Scene, patterns: &Patterns, opts: &ChannelOptions) -> Result<ChannelTensor> {
    let (n_bs, n_sat, n_ue, n_t) = (scene.n_bs(), scene.n_sat(), scene.n_ue(), scene.n_slots());
    if scene.ue_positions.len() != n_ue || scene.ue_positions.iter().any(|p| p.len() != n_t) {
        return Err(Error::Dimension("UE positions do not match the slot grid".into()));
    }
    if scene.sat_positions.len() != n_sat || scene.sat_positions.iter().any(|p| p.len() != n_t) {
        return Err(Error::Dimension("satellite positions do not match the slot grid".into()));
    }
    let eval = LinkEvaluator::new(scene, patterns, opts.clone());
    let h: Vec<f64> = (0..n_bs * n_ue * n_t)
        .into_par_iter()
        .map(|i| {
            let (n, k, t) = (i / (n_ue * n_t), (i / n_t) % n_ue, i % n_t);
            eval.bs_gain(n, &scene.ue_positions[k][t])
        })
        .collect();
    let g: Vec<f64> = (0..n_sat * n_ue * n_t)
        .into_par_iter()
        .map(|i| {
            let (m, k, t) = (i / (n_ue * n_t), (i / n_t) % n_ue, i % n_t);
            eval.sat_gain(m, t, &scene.ue_positions[k][t])
        })
        .collect();
    let h = Array3::from_shape_vec((n_bs, n_ue, n_t), h).expect("shape");
    let g = Array3::from_shape_vec((n_sat, n_ue, n_t), g).expect("shape");
    ChannelTensor::new(h, g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkSide {
    /// Base-station links; satellites interfere.
    Tn,
    /// Satellite links; base stations interfere.
    Ntn,
}

impl LinkSide {
    pub fn as_str(&self) -> &'static str {
        match self {
            LinkSide::Tn => "tn",
            LinkSide::Ntn => "ntn",
        }
    }
}

/// Carrier-to-interference-plus-noise ratio in linear scale.
///
/// Desired power is the strongest own-side transmitter at its per-connection
/// power; interference is the sum over the other side.
pub fn cinr_from_powers(own: &[f64], other: &[f64], noise_w: f64) -> f64 {
    let desired = own.iter().copied().fold(0.0, f64::max);
    let interference: f64 = other.iter().sum();
    desired / (interference + noise_w)
}

/// Received per-connection powers `(bs, sat)` at `pos` during slot `t`.
pub fn received_powers(eval: &LinkEvaluator, pos: &Vector3<f64>, t: usize, power: &PowerAllocation) -> (Vec<f64>, Vec<f64>) {
    let bs = (0..eval.scene.n_bs()).map(|n| power.p_bs[n] * eval.bs_gain(n, pos)).collect();
    let sat = (0..eval.scene.n_sat()).map(|m| power.p_sat[m] * eval.sat_gain(m, t, pos)).collect();
    (bs, sat)
}

/// CINR in dB at one point.
pub fn cinr_at(eval: &LinkEvaluator, pos: &Vector3<f64>, t: usize, side: LinkSide, power: &PowerAllocation, noise_w: f64) -> f64 {
    let (bs, sat) = received_powers(eval, pos, t, power);
    let lin = match side {
        LinkSide::Tn => cinr_from_powers(&bs, &sat, noise_w),
        LinkSide::Ntn => cinr_from_powers(&sat, &bs, noise_w),
    };
    10.0 * lin.log10()
}

/// Receiver grid: `points_per_segment²` cell-centered points per segment at
/// height `rx_height_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points_per_segment: usize,
    pub rx_height_m: f64,
}

impl GridSpec {
    pub fn dims(&self, scene: &Scene) -> (usize, usize) {
        (
            scene.city.seg_rows * self.points_per_segment,
            scene.city.seg_cols * self.points_per_segment,
        )
    }

    /// Scene position of matrix cell `(row, col)`; row 0 is the northern edge.
    pub fn point(&self, scene: &Scene, row: usize, col: usize) -> Vector3<f64> {
        let (rows, cols) = self.dims(scene);
        let [sx, sy] = scene.city.size_m;
        Vector3::new(
            (col as f64 + 0.5) * sx / cols as f64,
            sy - (row as f64 + 0.5) * sy / rows as f64,
            self.rx_height_m,
        )
    }

    /// Inverse of [`GridSpec::point`]: the cell containing `(x, y)`.
    pub fn cell_of(&self, scene: &Scene, x: f64, y: f64) -> (usize, usize) {
        let (rows, cols) = self.dims(scene);
        let [sx, sy] = scene.city.size_m;
        let col = ((x / sx * cols as f64).floor().max(0.0) as usize).min(cols - 1);
        let row = (((sy - y) / sy * rows as f64).floor().max(0.0) as usize).min(rows - 1);
        (row, col)
    }
}

/// CINR map in dB over the receiver grid at slot `t`.
pub fn cinr_grid(
    eval: &LinkEvaluator,
    spec: &GridSpec,
    t: usize,
    side: LinkSide,
    power: &PowerAllocation,
    noise_w: f64,
) -> Array2<f64> {
    let (rows, cols) = spec.dims(eval.scene);
    let v: Vec<f64> = (0..rows * cols)
        .into_par_iter()
        .map(|i| cinr_at(eval, &spec.point(eval.scene, i / cols, i % cols), t, side, power, noise_w))
        .collect();
    Array2::from_shape_vec((rows, cols), v).expect("shape")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_cinr_arithmetic() {
        let lin = cinr_from_powers(&[1e-13], &[5e-14], 6.69e-14);
        assert!((lin - 1e-13 / (5e-14 + 6.69e-14)).abs() < 1e-15);
        assert!((10.0 * lin.log10() + 0.68).abs() < 0.005);
    }

    #[test]
    fn cinr_permutation_invariant() {
        let a = cinr_from_powers(&[1e-13, 3e-13, 2e-14], &[5e-14, 1e-15], 1e-14);
        let b = cinr_from_powers(&[2e-14, 1e-13, 3e-13], &[1e-15, 5e-14], 1e-14);
        assert_eq!(a, b);
    }

    #[test]
    fn no_interferers_is_snr() {
        assert_eq!(cinr_from_powers(&[4e-13, 1e-13], &[], 2e-13), 2.0);
    }

    #[test]
    fn tensor_shape_check() {
        let h = Array3::zeros((2, 3, 4));
        assert!(ChannelTensor::new(h.clone(), Array3::zeros((1, 3, 4))).is_ok());
        assert!(ChannelTensor::new(h, Array3::zeros((1, 2, 4))).is_err());
    }
}
