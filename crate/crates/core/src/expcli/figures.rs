use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;

use super::{fmt_db, solve_problem, OutputDir, RunManifest, ScenarioConfig, World};
use crate::antenna::{bs_gain, sat_gain, ue_gain};
use crate::channel::{cinr_from_powers, received_powers, GridSpec, LinkEvaluator, LinkSide};
use crate::consts::{dbm_to_watts, dbw_to_watts};
use crate::error::{Error, Result};
use crate::sysmodel::{write_association_csv, AssociationVars, PowerAllocation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerSide {
    /// Values in dBm.
    Bs,
    /// Values in dBW.
    Sat,
}

impl FromStr for PowerSide {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "bs" => Ok(PowerSide::Bs),
            "sat" => Ok(PowerSide::Sat),
            _ => Err(format!("unknown side `{s}` (expected bs or sat)")),
        }
    }
}

impl PowerSide {
    pub fn as_str(&self) -> &'static str {
        match self {
            PowerSide::Bs => "bs",
            PowerSide::Sat => "sat",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub power: f64,
    pub sr_sca: f64,
    pub sr_greedy: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub config: ScenarioConfig,
    pub side: PowerSide,
    pub rows: Vec<SweepRow>,
    /// `(sca, greedy)` associations per row.
    pub assoc: Vec<(AssociationVars, AssociationVars)>,
}

impl SweepTable {
    /// Index of the smallest SCA sum rate when it sits strictly inside the
    /// sweep, below the first value and below the last.
    pub fn interior_minimum(&self) -> Option<usize> {
        let sr: Vec<f64> = self.rows.iter().map(|r| r.sr_sca).collect();
        let last = sr.len().checked_sub(1)?;
        let i = (0..sr.len()).min_by(|&a, &b| sr[a].total_cmp(&sr[b]))?;
        (i > 0 && i < last && sr[i] < sr[0] && sr[last] > sr[i]).then_some(i)
    }

    pub fn write(&self, dir: &Path) -> Result<RunManifest> {
        let mut out = OutputDir::create(dir, &self.config)?;
        let mut s = Vec::new();
        writeln!(s, "power,sr_sca,sr_greedy,iterations,converged")?;
        for r in &self.rows {
            writeln!(s, "{},{:.12e},{:.12e},{},{}", r.power, r.sr_sca, r.sr_greedy, r.iterations, r.converged)?;
        }
        out.put("sweep.csv", &s, false)?;
        for (i, (sca, greedy)) in self.assoc.iter().enumerate() {
            let mut s = Vec::new();
            write_association_csv(sca, &mut s)?;
            out.put(&format!("assoc_sca_{i}.csv"), &s, false)?;
            let mut s = Vec::new();
            write_association_csv(greedy, &mut s)?;
            out.put(&format!("assoc_greedy_{i}.csv"), &s, false)?;
        }
        let min = self.interior_minimum();
        let trend = serde_json::json!({
            "side": self.side,
            "unit": match self.side { PowerSide::Bs => "dBm", PowerSide::Sat => "dBW" },
            "interior_minimum_index": min,
            "interior_minimum_power": min.map(|i| self.rows[i].power),
        });
        out.put("trend.json", serde_json::to_string_pretty(&trend)?.as_bytes(), false)?;
        out.finish()
    }
}

/// Solves the scenario once per power value. The channel does not depend on
/// transmit power, so it is traced once and shared by all points.
pub fn sweep_power(cfg: &ScenarioConfig, side: PowerSide, values: &[f64]) -> Result<SweepTable> {
    if values.is_empty() {
        return Err(Error::config("sweep.values", "need at least one value"));
    }
    if values.windows(2).any(|w| !(w[0] < w[1])) || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::config("sweep.values", "must be finite and strictly increasing"));
    }
    let world = World::build(cfg)?;
    let base = world.problem()?;
    let results = values
        .par_iter()
        .map(|&v| {
            let mut c = cfg.clone();
            let mut p = base.clone();
            let s = &world.scene;
            let (mut bs_max, mut sat_max): (Vec<f64>, Vec<f64>) =
                (s.sites.iter().map(|b| b.max_power_w).collect(), s.orbits.iter().map(|o| o.max_power_w).collect());
            match side {
                PowerSide::Bs => {
                    c.terrestrial.max_power_dbm = v;
                    bs_max.fill(dbm_to_watts(v));
                }
                PowerSide::Sat => {
                    c.constellation.max_power_dbw = v;
                    sat_max.fill(dbw_to_watts(v));
                }
            }
            p.power = PowerAllocation::uniform(&bs_max, &p.capacity.bs_capacity, &sat_max, &p.capacity.sat_capacity);
            solve_problem(&c, p, Instant::now())
        })
        .collect::<Vec<_>>();
    let mut rows = Vec::new();
    let mut assoc = Vec::new();
    for (r, &v) in results.into_iter().zip(values) {
        let r = r?;
        rows.push(SweepRow {
            power: v,
            sr_sca: r.sum_rate_sca,
            sr_greedy: r.sum_rate_greedy,
            iterations: r.sca.trace.iterations(),
            converged: r.sca.trace.converged,
        });
        assoc.push((r.sca.assoc, r.greedy));
    }
    Ok(SweepTable { config: cfg.clone(), side, rows, assoc })
}

#[derive(Debug, Clone)]
pub struct Heatmap {
    pub slot: usize,
    pub side: LinkSide,
    /// Row 0 is the northern edge.
    pub cinr_db: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoutePoint {
    pub ue: usize,
    pub slot: usize,
    pub x: f64,
    pub y: f64,
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone)]
pub struct HeatmapSet {
    pub config: ScenarioConfig,
    pub spec: GridSpec,
    pub maps: Vec<Heatmap>,
    pub routes: Vec<RoutePoint>,
}

impl HeatmapSet {
    pub fn write(&self, dir: &Path) -> Result<RunManifest> {
        let mut out = OutputDir::create(dir, &self.config)?;
        let [lo, hi] = self.config.experiment.heatmap.gray_range_db;
        for m in &self.maps {
            let stem = format!("cinr_{}_t{}", m.side.as_str(), m.slot);
            let mut s = Vec::new();
            for row in m.cinr_db.rows() {
                let line: Vec<String> = row.iter().map(|&v| fmt_db(v)).collect();
                writeln!(s, "{}", line.join(","))?;
            }
            out.put(&format!("{stem}.csv"), &s, false)?;
            out.put(&format!("{stem}.pgm"), &to_pgm(&m.cinr_db, lo, hi), false)?;
        }
        let mut s = Vec::new();
        writeln!(s, "ue,slot,x,y,row,col")?;
        for r in &self.routes {
            writeln!(s, "{},{},{:.6},{:.6},{},{}", r.ue, r.slot, r.x, r.y, r.row, r.col)?;
        }
        out.put("routes.csv", &s, false)?;
        out.finish()
    }
}

/// Binary 8-bit PGM; `lo` maps to black and `hi` to white.
pub fn to_pgm(m: &Array2<f64>, lo: f64, hi: f64) -> Vec<u8> {
    let (rows, cols) = m.dim();
    let mut b = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    b.extend(m.iter().map(|&v| {
        let x = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
        if x.is_nan() {
            0
        } else {
            (x * 255.0).round() as u8
        }
    }));
    b
}

/// TN and NTN CINR maps for each slot, plus the UE positions mapped onto the
/// grid.
pub fn emit_heatmaps(cfg: &ScenarioConfig, slots: &[usize]) -> Result<HeatmapSet> {
    let world = World::build(cfg)?;
    let n_t = world.scene.n_slots();
    if let Some(&bad) = slots.iter().find(|&&t| t >= n_t) {
        return Err(Error::config("heatmap.slots", format!("slot {bad} is outside the {n_t}-slot grid")));
    }
    let h = &cfg.experiment.heatmap;
    let spec = GridSpec { points_per_segment: h.points_per_segment, rx_height_m: h.rx_height_m };
    let mut options = world.options.clone();
    options.trace.reflections = h.reflections;
    let eval = LinkEvaluator::new(&world.scene, &world.patterns, options);
    let power = world.power();
    let mut maps = Vec::new();
    for &t in slots {
        let (tn, ntn) = heatmap_pair(&eval, &spec, t, &power, world.noise_w);
        maps.push(Heatmap { slot: t, side: LinkSide::Tn, cinr_db: tn });
        maps.push(Heatmap { slot: t, side: LinkSide::Ntn, cinr_db: ntn });
    }
    let mut routes = Vec::new();
    for (k, pos) in world.scene.ue_positions.iter().enumerate() {
        for (t, p) in pos.iter().enumerate() {
            let (row, col) = spec.cell_of(&world.scene, p.x, p.y);
            routes.push(RoutePoint { ue: k, slot: t, x: p.x, y: p.y, row, col });
        }
    }
    Ok(HeatmapSet { config: cfg.clone(), spec, maps, routes })
}

/// Both sides from one set of received powers per grid point.
pub fn heatmap_pair(
    eval: &LinkEvaluator,
    spec: &GridSpec,
    t: usize,
    power: &PowerAllocation,
    noise_w: f64,
) -> (Array2<f64>, Array2<f64>) {
    let (rows, cols) = spec.dims(eval.scene);
    let v: Vec<(f64, f64)> = (0..rows * cols)
        .into_par_iter()
        .map(|i| {
            let (bs, sat) = received_powers(eval, &spec.point(eval.scene, i / cols, i % cols), t, power);
            let tn = 10.0 * cinr_from_powers(&bs, &sat, noise_w).log10();
            let ntn = 10.0 * cinr_from_powers(&sat, &bs, noise_w).log10();
            (tn, ntn)
        })
        .collect();
    let tn = Array2::from_shape_vec((rows, cols), v.iter().map(|p| p.0).collect()).expect("shape");
    let ntn = Array2::from_shape_vec((rows, cols), v.iter().map(|p| p.1).collect()).expect("shape");
    (tn, ntn)
}

#[derive(Debug, Clone)]
pub struct Timeline {
    pub config: ScenarioConfig,
    pub ue: usize,
    pub n_bs: usize,
    pub n_sat: usize,
    /// `[slot, link]` CINR in dB, BS links first. Invisible satellites are `-inf`.
    pub cinr_db: Array2<f64>,
}

impl Timeline {
    pub fn write(&self, dir: &Path) -> Result<RunManifest> {
        let mut out = OutputDir::create(dir, &self.config)?;
        let mut s = Vec::new();
        let mut head = vec!["slot".to_string()];
        head.extend((0..self.n_bs).map(|n| format!("bs{n}")));
        head.extend((0..self.n_sat).map(|m| format!("sat{m}")));
        writeln!(s, "{}", head.join(","))?;
        for (t, row) in self.cinr_db.rows().into_iter().enumerate() {
            let mut line = vec![t.to_string()];
            line.extend(row.iter().map(|&v| fmt_db(v)));
            writeln!(s, "{}", line.join(","))?;
        }
        out.put(&format!("timeline_ue{}.csv", self.ue), &s, false)?;
        out.finish()
    }
}

/// Per-link CINR for one UE over every slot. A link's CINR counts the whole
/// other side as interference, so the best BS column equals the TN map value
/// at the UE position.
pub fn emit_cinr_timeline(cfg: &ScenarioConfig, ue: usize) -> Result<Timeline> {
    let world = World::build(cfg)?;
    let s = &world.scene;
    if ue >= s.n_ue() {
        return Err(Error::config("timeline.ue", format!("UE {ue} does not exist ({} UEs)", s.n_ue())));
    }
    let eval = world.evaluator();
    let power = world.power();
    let (n_bs, n_sat) = (s.n_bs(), s.n_sat());
    let rows: Vec<Vec<f64>> = (0..s.n_slots())
        .into_par_iter()
        .map(|t| {
            let (bs, sat) = received_powers(&eval, &s.ue_positions[ue][t], t, &power);
            let db = |own: f64, other: &[f64]| 10.0 * cinr_from_powers(&[own], other, world.noise_w).log10();
            bs.iter().map(|&b| db(b, &sat)).chain(sat.iter().map(|&g| db(g, &bs))).collect()
        })
        .collect();
    let cinr_db = Array2::from_shape_fn((s.n_slots(), n_bs + n_sat), |(t, j)| rows[t][j]);
    Ok(Timeline { config: cfg.clone(), ue, n_bs, n_sat, cinr_db })
}

/// Antenna pattern cuts in dBi.
#[derive(Debug, Clone)]
pub struct PatternDump {
    pub config: ScenarioConfig,
    /// `(off-boresight deg, gain)`.
    pub sat: Vec<(f64, f64)>,
    /// `(azimuth off boresight deg, gain)` at the downtilt.
    pub bs_azimuth: Vec<(f64, f64)>,
    /// `(depression deg, gain)` on the sector axis.
    pub bs_elevation: Vec<(f64, f64)>,
    /// `(zenith deg, gain at phi = 0, gain at phi = 45 deg)`.
    pub ue: Vec<(f64, f64, f64)>,
}

pub fn pattern_dump(cfg: &ScenarioConfig) -> Result<PatternDump> {
    cfg.validate()?;
    let p = cfg.patterns();
    let bs = &p.bs;
    let sat = (0..=1800).map(|i| i as f64 * 0.05).map(|d| (d, sat_gain(&p.sat, d.to_radians()))).collect();
    let bs_azimuth = (-180..=180)
        .map(|a| a as f64)
        .map(|a| (a, bs_gain(bs, bs.sector_azimuth_deg + a, bs.downtilt_deg)))
        .collect();
    let bs_elevation =
        (-90..=90).map(|e| e as f64).map(|e| (e, bs_gain(bs, bs.sector_azimuth_deg, e))).collect();
    let ue = (0..=180)
        .map(|i| i as f64 * 0.5)
        .map(|d| (d, ue_gain(&p.ue, d.to_radians(), 0.0), ue_gain(&p.ue, d.to_radians(), 45f64.to_radians())))
        .collect();
    Ok(PatternDump { config: cfg.clone(), sat, bs_azimuth, bs_elevation, ue })
}

impl PatternDump {
    pub fn write(&self, dir: &Path) -> Result<RunManifest> {
        let mut out = OutputDir::create(dir, &self.config)?;
        let mut s = Vec::new();
        writeln!(s, "theta_deg,gain_dbi")?;
        for (a, g) in &self.sat {
            writeln!(s, "{a:.2},{g:.12e}")?;
        }
        out.put("pattern_sat.csv", &s, false)?;
        let mut s = Vec::new();
        writeln!(s, "cut,angle_deg,gain_dbi")?;
        for (a, g) in &self.bs_azimuth {
            writeln!(s, "azimuth,{a},{g:.12e}")?;
        }
        for (a, g) in &self.bs_elevation {
            writeln!(s, "depression,{a},{g:.12e}")?;
        }
        out.put("pattern_bs.csv", &s, false)?;
        let mut s = Vec::new();
        writeln!(s, "theta_deg,gain_phi0_dbi,gain_phi45_dbi")?;
        for (a, g0, g45) in &self.ue {
            writeln!(s, "{a:.1},{g0:.12e},{g45:.12e}")?;
        }
        out.put("pattern_ue.csv", &s, false)?;
        out.finish()
    }
}
