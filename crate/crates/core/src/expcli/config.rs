use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::antenna::{BsPattern, SatPattern, UeArray, UePattern};
use crate::channel::{BasicLoss, ChannelOptions, NoiseModel, Patterns, PlMode, TraceOptions};
use crate::consts::{dbm_to_watts, dbw_to_watts, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::greedy::GreedyOptions;
use crate::sca::ScaConfig;
use crate::scene::{CityParams, GeoOrigin};

/// Complete description of one experiment. Every field has a default, so
/// `{}` is a valid configuration (the 3×3-segment desk scenario).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub scene: SceneConfig,
    pub time: TimeConfig,
    pub constellation: ConstellationConfig,
    pub terrestrial: TerrestrialConfig,
    pub ue: UeConfig,
    pub channel: ChannelConfig,
    pub solver: ScaConfig,
    pub greedy: GreedyOptions,
    pub experiment: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    /// South-west corner, degrees.
    pub origin_deg: [f64; 2],
    /// `[latitude, longitude]` span, degrees.
    pub extent_deg: [f64; 2],
    pub segment_deg: [f64; 2],
    pub density: f64,
    pub height_range_m: [f64; 2],
    pub lots_per_segment: usize,
    pub street_width_m: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        let c = CityParams::default();
        Self {
            origin_deg: [c.origin.lat_deg, c.origin.lon_deg],
            extent_deg: c.extent_deg,
            segment_deg: c.segment_deg,
            density: c.density,
            height_range_m: c.height_range_m,
            lots_per_segment: c.lots_per_segment,
            street_width_m: c.street_width_m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    pub n_slots: usize,
    pub slot_duration_s: f64,
    pub start_epoch_s: f64,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self { n_slots: 60, slot_duration_s: 1.0, start_epoch_s: 0.0 }
    }
}

/// Where an orbit sits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Placement {
    /// Ascending pass whose sub-satellite point is offset from the city
    /// centre by `offset_deg` (latitude, longitude) at `time_s`.
    Pass { offset_deg: [f64; 2], time_s: f64 },
    Elements { raan_deg: f64, initial_anomaly_deg: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstellationConfig {
    pub altitude_m: f64,
    pub inclination_deg: f64,
    pub max_power_dbw: f64,
    pub capacity: u32,
    pub background_load: u32,
    pub antenna: SatPattern,
    pub orbits: Vec<Placement>,
}

impl Default for ConstellationConfig {
    fn default() -> Self {
        Self {
            altitude_m: 500e3,
            inclination_deg: 53.0,
            max_power_dbw: 16.0,
            capacity: 80,
            background_load: 0,
            antenna: SatPattern::default(),
            orbits: vec![
                Placement::Pass { offset_deg: [0.0, 0.0], time_s: 30.0 },
                Placement::Pass { offset_deg: [-2.0, 3.0], time_s: 30.0 },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TerrestrialConfig {
    pub max_power_dbm: f64,
    pub capacity: u32,
    pub background_load: u32,
    pub mast_height_m: f64,
    pub empty_segment_height_m: f64,
    pub antenna: BsPattern,
}

impl Default for TerrestrialConfig {
    fn default() -> Self {
        let b = crate::scene::BsConfig::default();
        Self {
            max_power_dbm: b.max_power_dbm,
            capacity: b.capacity,
            background_load: b.background_load,
            mast_height_m: b.mast_height_m,
            empty_segment_height_m: b.empty_segment_height_m,
            antenna: BsPattern { downtilt_deg: b.downtilt_deg, ..BsPattern::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UeConfig {
    /// Number of UEs when `routes` is empty.
    pub count: usize,
    pub speed_mps: f64,
    pub mount_height_m: f64,
    /// Explicit routes; when non-empty they replace the generated street walks.
    pub routes: Vec<crate::scene::UERoute>,
    pub antenna: UePattern,
}

impl Default for UeConfig {
    fn default() -> Self {
        Self { count: 4, speed_mps: 10.0, mount_height_m: 1.5, routes: Vec::new(), antenna: UePattern::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    pub antenna_temperature_k: f64,
    pub l_b_tn_db: f64,
    pub l_b_ntn_db: f64,
    /// Wall loss per building wall class, dB.
    pub wall_loss_db: Vec<f64>,
    pub reflections: bool,
    pub reflection_loss_db: f64,
    pub min_elevation_deg: f64,
    pub pl_mode: PlMode,
    pub pl_cap_db: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        let n = NoiseModel::default();
        let b = BasicLoss::default();
        let t = TraceOptions::default();
        let o = ChannelOptions::default();
        Self {
            carrier_hz: 3.4e9,
            bandwidth_hz: n.bandwidth_hz,
            noise_figure_db: n.noise_figure_db,
            antenna_temperature_k: n.antenna_temperature_k,
            l_b_tn_db: b.l_b_tn_db,
            l_b_ntn_db: b.l_b_ntn_db,
            wall_loss_db: t.wall_loss_db,
            reflections: t.reflections,
            reflection_loss_db: t.reflection_loss_db,
            min_elevation_deg: o.min_elevation_deg,
            pl_mode: o.pl_mode,
            pl_cap_db: o.pl_cap_db,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub heatmap: HeatmapConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeatmapConfig {
    pub points_per_segment: usize,
    pub rx_height_m: f64,
    /// Reflections multiply the trace cost per grid point; off by default.
    pub reflections: bool,
    /// dB range mapped onto the PGM gray scale.
    pub gray_range_db: [f64; 2],
}

impl Default for HeatmapConfig {
    fn default() -> Self {
        Self { points_per_segment: 100, rx_height_m: 1.5, reflections: false, gray_range_db: [-20.0, 30.0] }
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            scene: SceneConfig::default(),
            time: TimeConfig::default(),
            constellation: ConstellationConfig::default(),
            terrestrial: TerrestrialConfig::default(),
            ue: UeConfig::default(),
            channel: ChannelConfig::default(),
            solver: ScaConfig::default(),
            greedy: GreedyOptions::default(),
            experiment: ExperimentConfig::default(),
        }
    }
}

fn check(ok: bool, path: &str, reason: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(path, reason))
    }
}

impl ScenarioConfig {
    /// The desk scenario: 3×3 segments, two satellites, four UEs, 60 slots.
    pub fn desk() -> Self {
        Self::default()
    }

    /// The full measurement area: 4×10 segments of 0.005°.
    pub fn full_area() -> Self {
        let mut c = Self::default();
        c.scene.extent_deg = [0.02, 0.05];
        c.constellation.orbits = vec![
            Placement::Pass { offset_deg: [0.0, 0.0], time_s: 30.0 },
            Placement::Pass { offset_deg: [-2.0, 3.0], time_s: 30.0 },
        ];
        c
    }

    /// Reference scenario for BS power sweeps. Both satellites pass overhead
    /// and every BS carries ten background connections. At low BS power the
    /// satellite links carry the sum rate; raising BS power first drowns them
    /// in interference and only later pays off on the terrestrial side. The
    /// satellite power sits below the 16 dBW default so that the turning point
    /// falls inside 30-45 dBm.
    pub fn strong_satellite() -> Self {
        let mut c = Self::default();
        c.time.n_slots = 10;
        c.constellation.max_power_dbw = 4.0;
        c.constellation.orbits = vec![
            Placement::Pass { offset_deg: [0.0, 0.0], time_s: 5.0 },
            Placement::Pass { offset_deg: [-0.5, 0.5], time_s: 5.0 },
        ];
        c.terrestrial.background_load = 10;
        c
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the compact JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.scene;
        check(s.extent_deg.iter().all(|&v| v > 0.0), "scene.extent_deg", "must be positive")?;
        check(s.segment_deg.iter().all(|&v| v > 0.0), "scene.segment_deg", "must be positive")?;
        check((0.0..=1.0).contains(&s.density), "scene.density", "must lie in [0, 1]")?;
        check(
            s.height_range_m[0] > 0.0 && s.height_range_m[0] <= s.height_range_m[1],
            "scene.height_range_m",
            "must be an increasing pair of positive heights",
        )?;
        check(s.lots_per_segment >= 1, "scene.lots_per_segment", "must be at least 1")?;
        check(s.street_width_m >= 0.0, "scene.street_width_m", "must be non-negative")?;

        let t = &self.time;
        check(t.n_slots >= 1, "time.n_slots", "must be at least 1")?;
        check(t.slot_duration_s > 0.0, "time.slot_duration_s", "must be positive")?;

        let c = &self.constellation;
        check(c.altitude_m > 0.0, "constellation.altitude_m", "must be positive")?;
        check(c.capacity >= 1, "constellation.capacity", "must be at least 1")?;
        check(c.background_load <= c.capacity, "constellation.background_load", "exceeds capacity")?;
        check(c.max_power_dbw.is_finite(), "constellation.max_power_dbw", "must be finite")?;

        let b = &self.terrestrial;
        check(b.capacity >= 1, "terrestrial.capacity", "must be at least 1")?;
        check(b.background_load <= b.capacity, "terrestrial.background_load", "exceeds capacity")?;
        check(b.max_power_dbm.is_finite(), "terrestrial.max_power_dbm", "must be finite")?;

        let u = &self.ue;
        check(u.speed_mps >= 0.0, "ue.speed_mps", "must be non-negative")?;
        check(u.mount_height_m >= 0.0, "ue.mount_height_m", "must be non-negative")?;
        for (i, r) in u.routes.iter().enumerate() {
            r.validate().map_err(|e| Error::config(format!("ue.routes[{i}]"), e.to_string()))?;
        }

        let ch = &self.channel;
        check(ch.carrier_hz > 0.0, "channel.carrier_hz", "must be positive")?;
        check(ch.bandwidth_hz > 0.0, "channel.bandwidth_hz", "must be positive")?;
        check(!ch.wall_loss_db.is_empty(), "channel.wall_loss_db", "needs at least one wall class")?;
        check(ch.pl_cap_db > 0.0, "channel.pl_cap_db", "must be positive")?;

        let h = &self.experiment.heatmap;
        check(h.points_per_segment >= 1, "experiment.heatmap.points_per_segment", "must be at least 1")?;
        check(h.gray_range_db[0] < h.gray_range_db[1], "experiment.heatmap.gray_range_db", "must be increasing")?;

        self.solver.validate().map_err(|e| match e {
            Error::InvalidConfig { path, reason } => Error::config(format!("solver.{path}"), reason),
            other => other,
        })
    }

    pub fn n_ue(&self) -> usize {
        if self.ue.routes.is_empty() {
            self.ue.count
        } else {
            self.ue.routes.len()
        }
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.channel.carrier_hz
    }

    pub fn city_params(&self) -> CityParams {
        let s = &self.scene;
        CityParams {
            seed: self.seed,
            origin: GeoOrigin::new(s.origin_deg[0], s.origin_deg[1]),
            extent_deg: s.extent_deg,
            segment_deg: s.segment_deg,
            density: s.density,
            height_range_m: s.height_range_m,
            lots_per_segment: s.lots_per_segment,
            street_width_m: s.street_width_m,
        }
    }

    pub fn bs_config(&self) -> crate::scene::BsConfig {
        let b = &self.terrestrial;
        crate::scene::BsConfig {
            max_power_dbm: b.max_power_dbm,
            capacity: b.capacity,
            background_load: b.background_load,
            mast_height_m: b.mast_height_m,
            empty_segment_height_m: b.empty_segment_height_m,
            downtilt_deg: b.antenna.downtilt_deg,
        }
    }

    pub fn patterns(&self) -> Patterns {
        Patterns {
            sat: SatPattern { wavelength_m: self.wavelength_m(), ..self.constellation.antenna.clone() },
            bs: self.terrestrial.antenna.clone(),
            ue: UeArray::new(self.ue.antenna.clone()),
        }
    }

    pub fn channel_options(&self) -> ChannelOptions {
        let c = &self.channel;
        ChannelOptions {
            trace: TraceOptions {
                wavelength_m: self.wavelength_m(),
                reflections: c.reflections,
                reflection_loss_db: c.reflection_loss_db,
                wall_loss_db: c.wall_loss_db.clone(),
            },
            basic: BasicLoss { l_b_tn_db: c.l_b_tn_db, l_b_ntn_db: c.l_b_ntn_db },
            min_elevation_deg: c.min_elevation_deg,
            pl_mode: c.pl_mode,
            pl_cap_db: c.pl_cap_db,
        }
    }

    pub fn noise_model(&self) -> NoiseModel {
        NoiseModel {
            bandwidth_hz: self.channel.bandwidth_hz,
            noise_figure_db: self.channel.noise_figure_db,
            antenna_temperature_k: self.channel.antenna_temperature_k,
        }
    }

    pub fn bs_max_power_w(&self) -> f64 {
        dbm_to_watts(self.terrestrial.max_power_dbm)
    }

    pub fn sat_max_power_w(&self) -> f64 {
        dbw_to_watts(self.constellation.max_power_dbw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_default() {
        assert_eq!(ScenarioConfig::from_json("{}").unwrap(), ScenarioConfig::default());
    }

    #[test]
    fn defaults_match_reference_parameters() {
        let c = ScenarioConfig::default();
        assert_eq!(c.constellation.max_power_dbw, 16.0);
        assert_eq!(c.constellation.capacity, 80);
        assert_eq!(c.constellation.altitude_m, 500e3);
        assert_eq!(c.constellation.inclination_deg, 53.0);
        assert_eq!(c.constellation.orbits.len(), 2);
        assert_eq!(c.terrestrial.max_power_dbm, 42.0);
        assert_eq!(c.terrestrial.capacity, 20);
        assert_eq!(c.n_ue(), 4);
        assert_eq!(c.channel.carrier_hz, 3.4e9);
        assert_eq!(c.channel.bandwidth_hz, 20e6);
        assert_eq!(c.experiment.heatmap.points_per_segment, 100);
        assert_eq!(c.scene.segment_deg, [0.005, 0.005]);
        let p = ScenarioConfig::full_area();
        assert_eq!(p.scene.origin_deg, [51.5115, -0.1022]);
        assert_eq!(p.scene.extent_deg, [0.02, 0.05]);
    }

    #[test]
    fn round_trips_through_json() {
        let c = ScenarioConfig::strong_satellite();
        let back = ScenarioConfig::from_json(&c.to_json_pretty()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        assert_ne!(ScenarioConfig::default().hash(), c.hash());
    }

    #[test]
    fn errors_carry_field_paths() {
        let e = ScenarioConfig::from_json(r#"{"scene": {"density": "lots"}}"#).unwrap_err();
        assert!(matches!(&e, Error::InvalidConfig { path, .. } if path == "scene.density"), "{e}");
        let e = ScenarioConfig::from_json(r#"{"ue": {"colour": 3}}"#).unwrap_err();
        assert!(matches!(&e, Error::InvalidConfig { path, .. } if path.starts_with("ue")), "{e}");
        let e = ScenarioConfig::from_json(r#"{"terrestrial": {"background_load": 30}}"#).unwrap_err();
        assert!(matches!(&e, Error::InvalidConfig { path, .. } if path == "terrestrial.background_load"));
        let e = ScenarioConfig::from_json(r#"{"solver": {"outer_tol": 0}}"#).unwrap_err();
        assert!(matches!(&e, Error::InvalidConfig { path, .. } if path == "solver.outer_tol"));
        let e = ScenarioConfig::from_json(r#"{"constellation": {"orbits": [{"type": "warp"}]}}"#).unwrap_err();
        assert!(matches!(&e, Error::InvalidConfig { path, .. } if path.starts_with("constellation.orbits")), "{e}");
    }

    #[test]
    fn placements_parse() {
        let c = ScenarioConfig::from_json(
            r#"{"constellation": {"orbits": [
                {"type": "elements", "raan_deg": 10, "initial_anomaly_deg": 20},
                {"type": "pass", "offset_deg": [1, 1], "time_s": 0}
            ]}}"#,
        )
        .unwrap();
        assert_eq!(c.constellation.orbits[0], Placement::Elements { raan_deg: 10.0, initial_anomaly_deg: 20.0 });
    }
}
