//! Experiment orchestration: scenario configuration, the end-to-end run, power
//! sweeps, CINR heatmaps and timelines, and the artifact writer.
//!
//! Every command writes into one output directory and finishes with a
//! `manifest.json` listing each file with its SHA-256 digest. Files whose
//! content depends on the wall clock are flagged `volatile`.

pub mod config;
mod figures;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use ndarray::{Array2, Array3};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::{
    ChannelConfig, ConstellationConfig, ExperimentConfig, HeatmapConfig, Placement, ScenarioConfig, SceneConfig,
    TerrestrialConfig, TimeConfig, UeConfig,
};
pub use figures::{
    emit_cinr_timeline, emit_heatmaps, pattern_dump, sweep_power, Heatmap, HeatmapSet, PatternDump, PowerSide,
    SweepRow, SweepTable, Timeline,
};

use crate::channel::{compute_channel_tensor, noise_power, ChannelOptions, ChannelTensor, LinkEvaluator, Patterns};
use crate::error::{Error, Result};
use crate::greedy::greedy_assign_with;
use crate::sca::{sca_solve, ScaSolution};
use crate::scene::{generate_city, pass_over, place_base_stations, street_walk, Scene, SatelliteOrbit, TimeGrid};
use crate::sysmodel::{write_association_csv, AssociationVars, CapacityProfile, LinkProblem, PowerAllocation};

/// Scene plus everything needed to evaluate links on it.
pub struct World {
    pub scene: Scene,
    pub patterns: Patterns,
    pub options: ChannelOptions,
    pub noise_w: f64,
}

impl World {
    pub fn build(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            scene: build_scene(cfg)?,
            patterns: cfg.patterns(),
            options: cfg.channel_options(),
            noise_w: noise_power(&cfg.noise_model()),
        })
    }

    pub fn evaluator(&self) -> LinkEvaluator<'_> {
        LinkEvaluator::new(&self.scene, &self.patterns, self.options.clone())
    }

    pub fn channel(&self) -> Result<ChannelTensor> {
        compute_channel_tensor(&self.scene, &self.patterns, &self.options)
    }

    pub fn capacity(&self) -> CapacityProfile {
        let s = &self.scene;
        let t = s.n_slots();
        CapacityProfile {
            bs_capacity: s.sites.iter().map(|b| b.capacity).collect(),
            sat_capacity: s.orbits.iter().map(|o| o.capacity).collect(),
            bs_background: Array2::from_shape_fn((s.n_bs(), t), |(n, t)| s.sites[n].background_load[t]),
            sat_background: Array2::from_shape_fn((s.n_sat(), t), |(m, t)| s.orbits[m].background_load[t]),
        }
    }

    pub fn power(&self) -> PowerAllocation {
        let s = &self.scene;
        PowerAllocation::uniform(
            &s.sites.iter().map(|b| b.max_power_w).collect::<Vec<_>>(),
            &s.sites.iter().map(|b| b.capacity).collect::<Vec<_>>(),
            &s.orbits.iter().map(|o| o.max_power_w).collect::<Vec<_>>(),
            &s.orbits.iter().map(|o| o.capacity).collect::<Vec<_>>(),
        )
    }

    /// Traces the channel and assembles the association problem.
    pub fn problem(&self) -> Result<LinkProblem> {
        let p = LinkProblem { channel: self.channel()?, power: self.power(), capacity: self.capacity(), noise_w: self.noise_w };
        p.validate()?;
        Ok(p)
    }
}

pub fn build_scene(cfg: &ScenarioConfig) -> Result<Scene> {
    let grid = TimeGrid::new(cfg.time.n_slots, cfg.time.slot_duration_s, cfg.time.start_epoch_s)?;
    let city = generate_city(&cfg.city_params())?;
    let sites = place_base_stations(&city, &cfg.bs_config(), &grid)?;

    let c = &cfg.constellation;
    let s = &cfg.scene;
    let centre = [s.origin_deg[0] + 0.5 * s.extent_deg[0], s.origin_deg[1] + 0.5 * s.extent_deg[1]];
    let orbits = c
        .orbits
        .iter()
        .enumerate()
        .map(|(i, pl)| {
            let (raan_deg, initial_anomaly_deg) = match pl {
                Placement::Pass { offset_deg, time_s } => pass_over(
                    centre[0] + offset_deg[0],
                    centre[1] + offset_deg[1],
                    c.altitude_m,
                    c.inclination_deg,
                    *time_s,
                )
                .map_err(|e| match e {
                    Error::InvalidConfig { reason, .. } => Error::config(format!("constellation.orbits[{i}]"), reason),
                    other => other,
                })?,
                Placement::Elements { raan_deg, initial_anomaly_deg } => (*raan_deg, *initial_anomaly_deg),
            };
            Ok(SatelliteOrbit {
                altitude_m: c.altitude_m,
                inclination_deg: c.inclination_deg,
                raan_deg,
                initial_anomaly_deg,
                max_power_w: cfg.sat_max_power_w(),
                capacity: c.capacity,
                background_load: vec![c.background_load; grid.n_slots],
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let u = &cfg.ue;
    let routes = if u.routes.is_empty() {
        (0..u.count)
            .map(|k| {
                let seed = cfg.seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(k as u64 + 1);
                street_walk(&city, s.lots_per_segment, &grid, u.speed_mps, u.mount_height_m, seed)
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        u.routes.clone()
    };
    Scene::new(city, sites, orbits, routes, grid)
}

/// Slots where the free capacity cannot give every UE one link.
pub fn capacity_shortfall(p: &LinkProblem) -> Vec<usize> {
    let (n_bs, n_sat, n_ue, n_t) = p.dims();
    (0..n_t)
        .filter(|&t| {
            let room: u64 = (0..n_bs).map(|n| p.capacity.bs_residual(n, t) as u64).sum::<u64>()
                + (0..n_sat).map(|m| p.capacity.sat_residual(m, t) as u64).sum::<u64>();
            room < n_ue as u64
        })
        .collect()
}

/// Results of [`run_scenario`].
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub config: ScenarioConfig,
    pub problem: LinkProblem,
    pub greedy: AssociationVars,
    pub sca: ScaSolution,
    pub sum_rate_greedy: f64,
    pub sum_rate_sca: f64,
    pub wall_time_s: f64,
}

/// Builds the scene, traces the channel, and runs both association algorithms.
///
/// Fails with [`Error::Capacity`] when some slot cannot serve every UE.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunArtifacts> {
    let clock = Instant::now();
    let world = World::build(cfg)?;
    let problem = world.problem()?;
    solve_problem(cfg, problem, clock)
}

pub(crate) fn solve_problem(cfg: &ScenarioConfig, problem: LinkProblem, clock: Instant) -> Result<RunArtifacts> {
    let short = capacity_shortfall(&problem);
    if !short.is_empty() {
        return Err(Error::Capacity { slots: short });
    }
    let greedy = greedy_assign_with(&problem.channel, &problem.capacity, &cfg.greedy);
    let sca = sca_solve(&problem, &cfg.solver)?;
    log::info!(
        "sca finished after {} iterations (converged: {})",
        sca.trace.iterations(),
        sca.trace.converged
    );
    Ok(RunArtifacts {
        config: cfg.clone(),
        sum_rate_greedy: problem.sum_rate(&greedy),
        sum_rate_sca: problem.sum_rate(&sca.assoc),
        problem,
        greedy,
        sca,
        wall_time_s: clock.elapsed().as_secs_f64(),
    })
}

impl RunArtifacts {
    /// Writes every table into `dir` and returns the manifest.
    pub fn write(&self, dir: &Path) -> Result<RunManifest> {
        let mut out = OutputDir::create(dir, &self.config)?;
        let p = &self.problem;

        let mut s = Vec::new();
        writeln!(s, "algorithm,sum_rate,iterations,converged,unserved")?;
        let tr = &self.sca.trace;
        writeln!(s, "sca,{:.12e},{},{},{}", self.sum_rate_sca, tr.iterations(), tr.converged, self.sca.unserved.len())?;
        writeln!(s, "greedy,{:.12e},1,true,0", self.sum_rate_greedy)?;
        out.put("summary.csv", &s, false)?;

        let (rs, rg) = (p.rate_table(&self.sca.assoc), p.rate_table(&self.greedy));
        let mut s = Vec::new();
        writeln!(s, "slot,ue,rate_sca,rate_greedy")?;
        for t in 0..rs.ncols() {
            for k in 0..rs.nrows() {
                writeln!(s, "{t},{k},{:.12e},{:.12e}", rs[[k, t]], rg[[k, t]])?;
            }
        }
        out.put("ue_rates.csv", &s, false)?;

        let mut s = Vec::new();
        write_association_csv(&self.sca.assoc, &mut s)?;
        out.put("assoc_sca.csv", &s, false)?;
        let mut s = Vec::new();
        write_association_csv(&self.greedy, &mut s)?;
        out.put("assoc_greedy.csv", &s, false)?;

        let mut s = Vec::new();
        tr.write_csv(&mut s)?;
        out.put("trace.csv", &s, false)?;
        let mut s = Vec::new();
        tr.write_timing_csv(&mut s)?;
        writeln!(s, "total,{:.6}", self.wall_time_s)?;
        out.put("timing.csv", &s, true)?;

        let mut s = Vec::new();
        writeln!(s, "slot,ue")?;
        for (t, k) in &self.sca.unserved {
            writeln!(s, "{t},{k}")?;
        }
        out.put("unserved.csv", &s, false)?;
        out.finish()
    }
}

/// Gain tensors as CSV: `side,node,ue,slot,gain`.
pub fn write_channel_csv<W: Write>(ch: &ChannelTensor, mut w: W) -> Result<()> {
    writeln!(w, "side,node,ue,slot,gain")?;
    for (side, a) in [("bs", &ch.h), ("sat", &ch.g)] {
        write_gain_block(&mut w, side, a)?;
    }
    Ok(())
}

fn write_gain_block<W: Write>(w: &mut W, side: &str, a: &Array3<f64>) -> Result<()> {
    for ((n, k, t), v) in a.indexed_iter() {
        writeln!(w, "{side},{n},{k},{t},{v:.12e}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
    /// Content depends on wall-clock time and is excluded from replay checks.
    pub volatile: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub seed: u64,
    pub code_version: String,
    pub created_unix_s: u64,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn read(dir: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json"))?)?)
    }

    /// Entries whose content is reproducible from the configuration alone.
    pub fn stable_files(&self) -> impl Iterator<Item = &FileEntry> {
        self.files.iter().filter(|f| !f.volatile)
    }
}

/// Collects output files and writes the manifest last.
pub(crate) struct OutputDir {
    dir: PathBuf,
    manifest: RunManifest,
}

impl OutputDir {
    pub fn create(dir: &Path, cfg: &ScenarioConfig) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let mut out = Self {
            dir: dir.to_path_buf(),
            manifest: RunManifest {
                config_hash: cfg.hash(),
                seed: cfg.seed,
                code_version: env!("CARGO_PKG_VERSION").to_string(),
                created_unix_s: created,
                files: Vec::new(),
            },
        };
        out.put("config.json", cfg.to_json_pretty().as_bytes(), false)?;
        Ok(out)
    }

    pub fn put(&mut self, name: &str, bytes: &[u8], volatile: bool) -> Result<()> {
        std::fs::write(self.dir.join(name), bytes)?;
        self.manifest.files.push(FileEntry {
            name: name.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len() as u64,
            volatile,
        });
        Ok(())
    }

    pub fn finish(self) -> Result<RunManifest> {
        let text = serde_json::to_string_pretty(&self.manifest)?;
        std::fs::write(self.dir.join("manifest.json"), text)?;
        Ok(self.manifest)
    }
}

/// Formats a dB value; `-inf` for links with zero gain.
pub(crate) fn fmt_db(v: f64) -> String {
    if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v:.12e}")
    }
}
