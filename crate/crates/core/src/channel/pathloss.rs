use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::rays::Ray;
use crate::antenna::Antenna;
use crate::consts::{BOLTZMANN, T0_KELVIN};

/// How per-ray contributions are combined into one path loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlMode {
    /// Phasor sum of field amplitudes `sqrt(Gr Gt / (Li LB)) e^{-j phi}`;
    /// `PL = -10 log10 |sum|^2`.
    #[default]
    Amplitude,
    /// Phasor sum of the power ratios `Gr Gt / (Li LB) e^{-j phi}` as they are
    /// usually printed; `PL = -10 log10 |sum|`.
    Literal,
}

/// Combines rays into an equivalent path loss in dB, capped at `cap_db`.
///
/// Rays must already be in canonical order so the floating-point sum is
/// reproducible.
pub fn equivalent_path_loss(
    rays: &[Ray],
    tx: &dyn Antenna,
    rx: &dyn Antenna,
    l_b_db: f64,
    mode: PlMode,
    cap_db: f64,
) -> f64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for r in rays {
        let g_db = rx.gain_dbi(&r.arrival) + tx.gain_dbi(&r.departure) - r.loss_db - l_b_db;
        let mag = match mode {
            PlMode::Amplitude => 10f64.powf(g_db / 20.0),
            PlMode::Literal => 10f64.powf(g_db / 10.0),
        };
        sum += Complex64::from_polar(mag, -r.phase);
    }
    let pl = match mode {
        PlMode::Amplitude => -10.0 * sum.norm_sqr().log10(),
        PlMode::Literal => -10.0 * sum.norm().log10(),
    };
    if pl.is_nan() {
        cap_db
    } else {
        pl.min(cap_db)
    }
}

/// Linear power gain of a path loss given in dB.
pub fn channel_gain(pl_db: f64) -> f64 {
    10f64.powf(-pl_db / 10.0)
}

/// Receiver noise description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    pub antenna_temperature_k: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            bandwidth_hz: 20e6,
            noise_figure_db: 1.2,
            antenna_temperature_k: 150.0,
        }
    }
}

/// `k_B (T_a + 290 (F - 1)) B` in watts.
pub fn noise_power(nm: &NoiseModel) -> f64 {
    let f = 10f64.powf(nm.noise_figure_db / 10.0);
    BOLTZMANN * (nm.antenna_temperature_k + T0_KELVIN * (f - 1.0)) * nm.bandwidth_hz
}

/// Basic (clutter/atmospheric) loss per link family, dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasicLoss {
    pub l_b_tn_db: f64,
    pub l_b_ntn_db: f64,
}

impl Default for BasicLoss {
    fn default() -> Self {
        Self {
            l_b_tn_db: 2.0,
            l_b_ntn_db: 3.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::antenna::Isotropic;
    use crate::channel::rays::{free_space_loss_db, RayKind};
    use crate::consts::SPEED_OF_LIGHT;
    use nalgebra::Vector3;
    use std::f64::consts::PI;

    fn ray(loss: f64, phase: f64) -> Ray {
        Ray {
            kind: RayKind::LineOfSight,
            path_length: 100.0,
            loss_db: loss,
            phase,
            departure: Vector3::x(),
            arrival: -Vector3::x(),
        }
    }

    const ISO: Isotropic = Isotropic(0.0);

    #[test]
    fn single_los_ray_is_fspl() {
        let lambda = SPEED_OF_LIGHT / 3.4e9;
        let fs = free_space_loss_db(100.0, lambda);
        let oracle = 20.0 * (4.0 * PI * 100.0 * 3.4e9 / 299_792_458.0f64).log10();
        assert!((fs - oracle).abs() < 1e-9);
        let pl = equivalent_path_loss(&[ray(fs, 1.234)], &ISO, &ISO, 0.0, PlMode::Amplitude, 250.0);
        assert!((pl - oracle).abs() < 1e-9);
    }

    #[test]
    fn single_ray_matches_budget_in_both_modes() {
        let tx = Isotropic(17.0);
        let rx = Isotropic(-3.5);
        for mode in [PlMode::Amplitude, PlMode::Literal] {
            let pl = equivalent_path_loss(&[ray(95.0, 0.3)], &tx, &rx, 2.0, mode, 250.0);
            assert!((pl - (95.0 + 2.0 + 3.5 - 17.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn coherent_pair_gains_six_db() {
        let one = equivalent_path_loss(&[ray(90.0, 0.7)], &ISO, &ISO, 0.0, PlMode::Amplitude, 250.0);
        let two = equivalent_path_loss(&[ray(90.0, 0.7), ray(90.0, 0.7)], &ISO, &ISO, 0.0, PlMode::Amplitude, 250.0);
        assert!((one - two - 20.0 * 2f64.log10()).abs() < 1e-9);
    }

    #[test]
    fn opposite_phases_hit_cap() {
        let pl = equivalent_path_loss(&[ray(83.0, 0.0), ray(83.0, PI)], &ISO, &ISO, 0.0, PlMode::Amplitude, 250.0);
        assert_eq!(pl, 250.0);
        assert_eq!(equivalent_path_loss(&[], &ISO, &ISO, 0.0, PlMode::Amplitude, 250.0), 250.0);
    }

    #[test]
    fn gains() {
        assert_eq!(channel_gain(0.0), 1.0);
        assert!((channel_gain(30.0) - 1e-3).abs() < 1e-18);
        assert!((channel_gain(83.08) / 10f64.powf(-8.308) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noise_reference_values() {
        let nm = NoiseModel::default();
        let db = 10.0 * noise_power(&nm).log10();
        assert!((db + 131.74).abs() < 0.01, "{db}");
        let unity = NoiseModel { noise_figure_db: 0.0, antenna_temperature_k: 290.0, ..nm.clone() };
        assert!((noise_power(&unity) - BOLTZMANN * 290.0 * 20e6).abs() < 1e-28);
        let wide = NoiseModel { bandwidth_hz: 40e6, ..nm.clone() };
        assert_eq!(noise_power(&wide), 2.0 * noise_power(&nm));
    }
}
