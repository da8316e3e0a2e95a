//! Acceptance suite. Each test prints one `[PASS]` or `[FAIL]` line straight to
//! stdout (visible without `--nocapture`) and then asserts.
//!
//! The tests hold a shared lock so that their runtime budgets are measured
//! one at a time.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use istn::antenna::{bessel_j1, sat_gain, ue_gain, SatPattern, UeArray, UePattern};
use istn::channel::{free_space_loss_db, is_blocked, noise_power, ChannelTensor, NoiseModel};
use istn::consts::{SPEED_OF_LIGHT, T0_KELVIN};
use istn::expcli::{emit_heatmaps, run_scenario, sweep_power, PowerSide, RunManifest, ScenarioConfig};
use istn::greedy::greedy_assign;
use istn::sca::{build_subproblem, exp_tangent, linearization_at, sca_solve, RelaxedVars, ScaConfig, SlackVars};
use istn::scene::orbital_period;
use istn::sysmodel::{check_feasibility, AssociationVars, CapacityProfile, LinkProblem, PowerAllocation};
use ndarray::{Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static SERIAL: Mutex<()> = Mutex::new(());

fn report(id: u32, title: &str, pass: bool, detail: &str, elapsed: Duration, budget: Duration) -> bool {
    let ok = pass && elapsed <= budget;
    let line = format!(
        "[{}] criterion {id}: {title} | {detail} | {:.1} s (budget {} s)\n",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
    ok
}

fn lock() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

// ---------------------------------------------------------------------------
// 1. tangent and lower bounds
// ---------------------------------------------------------------------------

fn random_problem(rng: &mut ChaCha8Rng, n: usize, m: usize, k: usize, t: usize, cap: u32) -> LinkProblem {
    let mut draw = |len| (0..len).map(|_| 10f64.powf(rng.gen_range(-2.0..3.0)) * 1e-12).collect::<Vec<_>>();
    let h = Array3::from_shape_vec((n, k, t), draw(n * k * t)).unwrap();
    let g = Array3::from_shape_vec((m, k, t), draw(m * k * t)).unwrap();
    LinkProblem {
        channel: ChannelTensor::new(h, g).unwrap(),
        power: PowerAllocation { p_bs: vec![1.0; n], p_sat: vec![0.5; m] },
        capacity: CapacityProfile {
            bs_capacity: vec![cap; n],
            sat_capacity: vec![cap; m],
            bs_background: Array2::zeros((n, t)),
            sat_background: Array2::from_elem((m, t), 1),
        },
        noise_w: 1e-12,
    }
}

/// Random point of the relaxed polytope: per UE and side a sub-stochastic row.
fn random_relaxed(rng: &mut ChaCha8Rng, p: &LinkProblem) -> RelaxedVars {
    let (n, m, k, t) = p.dims();
    let mut alpha = Array3::zeros((n, k, t));
    let mut beta = Array3::zeros((m, k, t));
    for tt in 0..t {
        for kk in 0..k {
            for (arr, nodes) in [(&mut alpha, n), (&mut beta, m)] {
                let w: Vec<f64> = (0..nodes).map(|_| rng.gen_range(0.0..1.0)).collect();
                let total: f64 = w.iter().sum::<f64>().max(1e-12);
                let scale = rng.gen_range(0.5..1.0);
                for (i, wi) in w.iter().enumerate() {
                    arr[[i, kk, tt]] = wi / total * scale;
                }
            }
        }
    }
    RelaxedVars { alpha, beta }
}

#[test]
fn criterion_1_tangent_and_rate_lower_bounds() {
    let _g = lock();
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut tangent_bad = 0;
    for _ in 0..100_000 {
        let z: f64 = rng.gen_range(-40.0..5.0);
        let z0: f64 = rng.gen_range(-40.0..5.0);
        let tan = exp_tangent(z, z0);
        if z.exp() < tan - 1e-9 * z.exp().max(tan.abs()) {
            tangent_bad += 1;
        }
    }
    let mut rate_bad = 0;
    let mut infeasible = 0;
    for _ in 0..1000 {
        let (n, m, k) = (rng.gen_range(1..=3), rng.gen_range(1..=2), rng.gen_range(1..=3));
        let p = random_problem(&mut rng, n, m, k, 1, 3);
        let lin = linearization_at(&p, &random_relaxed(&mut rng, &p));
        let sub = build_subproblem(&lin, &p, &ScaConfig::default());
        let r = random_relaxed(&mut rng, &p);
        let (mut mu_b, mut mu_s) = sub.mu_star(&r);
        mu_b.mapv_inplace(|v| v + rng.gen_range(0.0..2.0));
        mu_s.mapv_inplace(|v| v + rng.gen_range(0.0..2.0));
        let (mut lb, mut ls) = sub.max_lambda(&r, &mu_b, &mu_s);
        lb.mapv_inplace(|v| v - rng.gen_range(0.0..1.0));
        ls.mapv_inplace(|v| v - rng.gen_range(0.0..1.0));
        let slack = SlackVars { lambda_b: lb, lambda_s: ls, mu_b, mu_s };
        if !sub.satisfies_bounds(&r, &slack, 1e-12) {
            infeasible += 1;
        }
        for ((n, k, t), &l) in slack.lambda_b.indexed_iter() {
            if l > p.sinr_bs_relaxed(r.alpha.view(), r.beta.view(), n, k, t).ln_1p() + 1e-9 {
                rate_bad += 1;
            }
        }
        for ((m, k, t), &l) in slack.lambda_s.indexed_iter() {
            if l > p.sinr_sat_relaxed(r.alpha.view(), r.beta.view(), m, k, t).ln_1p() + 1e-9 {
                rate_bad += 1;
            }
        }
    }
    let pass = tangent_bad == 0 && rate_bad == 0 && infeasible == 0;
    let detail = format!(
        "tangent violations {tangent_bad}/100000, rate-bound violations {rate_bad} over 1000 feasible points ({infeasible} generated points infeasible)"
    );
    let ok = report(1, "tangent and lower bounds", pass, &detail, clock.elapsed(), Duration::from_secs(10));
    assert!(ok, "{detail}");
}

// ---------------------------------------------------------------------------
// 2. SCA monotonicity and convergence
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_sca_monotone_and_converges() {
    let _g = lock();
    let clock = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    let settings: [(&str, Option<f64>); 5] =
        [("default", None), ("14 dBW", Some(14.0)), ("16 dBW", Some(16.0)), ("18 dBW", Some(18.0)), ("20 dBW", Some(20.0))];
    for (name, ps) in settings {
        let mut c = ScenarioConfig::desk();
        if let Some(v) = ps {
            c.constellation.max_power_dbw = v;
        }
        let r = run_scenario(&c).unwrap();
        let tr = &r.sca.trace;
        let rows = &tr.rows;
        let last_change = match rows.len() {
            0 | 1 => f64::INFINITY,
            n => {
                let (a, b) = (rows[n - 2].subproblem_objective, rows[n - 1].subproblem_objective);
                (b - a).abs() / a.abs().max(1.0)
            }
        };
        let ok = tr.worst_decrease() <= 1e-7 && tr.converged && last_change < 1e-4 && tr.iterations() <= 30;
        pass &= ok;
        lines.push(format!("{name}: {} it, worst drop {:.1e}", tr.iterations(), tr.worst_decrease()));
    }
    let detail = lines.join("; ");
    let ok = report(2, "SCA monotonicity and convergence", pass, &detail, clock.elapsed(), Duration::from_secs(180));
    assert!(ok, "{detail}");
}

// ---------------------------------------------------------------------------
// 3. oracle equivalence on tiny instances
// ---------------------------------------------------------------------------

/// Exhaustive per-slot optimum. Slots without any association meeting every
/// constraint fall back to the best one meeting the per-side and capacity
/// limits only.
fn exhaustive_optimum(p: &LinkProblem) -> f64 {
    let (n, m, k, t) = p.dims();
    let opts: Vec<(Option<usize>, Option<usize>)> = (0..=n)
        .flat_map(|a| (0..=m).map(move |b| (a.checked_sub(1), b.checked_sub(1))))
        .collect();
    let mut total = 0.0;
    for tt in 0..t {
        let (mut full, mut partial) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut idx = vec![0usize; k];
        loop {
            let mut v = AssociationVars::zeros(n, m, k, t);
            for (kk, &i) in idx.iter().enumerate() {
                let (a, b) = opts[i];
                if let Some(a) = a {
                    v.alpha[[a, kk, tt]] = 1;
                }
                if let Some(b) = b {
                    v.beta[[b, kk, tt]] = 1;
                }
            }
            let viol: Vec<_> = check_feasibility(&v, &p.capacity).into_iter().filter(|x| x.slot == tt).collect();
            let sr: f64 = (0..k).map(|kk| p.ue_rate(&v, kk, tt)).sum();
            if viol.is_empty() {
                full = full.max(sr);
            }
            if viol.iter().all(|x| x.constraint == istn::sysmodel::Constraint::C5) {
                partial = partial.max(sr);
            }
            let mut i = 0;
            while i < k {
                idx[i] += 1;
                if idx[i] < opts.len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == k {
                break;
            }
        }
        total += if full.is_finite() { full } else { partial };
    }
    total
}

fn tiny_instance(seed: u64) -> LinkProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, m) = (rng.gen_range(1..=3), rng.gen_range(1..=2));
    let (k, t) = (rng.gen_range(1..=3), rng.gen_range(1..=2));
    let mut draw = |len| (0..len).map(|_| 10f64.powf(rng.gen_range(-1.5..2.5)) * 1e-13).collect::<Vec<_>>();
    let h = Array3::from_shape_vec((n, k, t), draw(n * k * t)).unwrap();
    let g = Array3::from_shape_vec((m, k, t), draw(m * k * t)).unwrap();
    let bs_capacity = (0..n).map(|_| rng.gen_range(1..=2)).collect();
    let sat_capacity = (0..m).map(|_| rng.gen_range(1..=2)).collect();
    LinkProblem {
        channel: ChannelTensor::new(h, g).unwrap(),
        power: PowerAllocation { p_bs: vec![1.0; n], p_sat: vec![1.0; m] },
        capacity: CapacityProfile {
            bs_capacity,
            sat_capacity,
            bs_background: Array2::zeros((n, t)),
            sat_background: Array2::zeros((m, t)),
        },
        noise_w: 1e-13,
    }
}

/// Either side alone has room for every UE in every slot.
fn greedy_has_room(p: &LinkProblem) -> bool {
    let (n, m, k, t) = p.dims();
    (0..t).all(|tt| {
        let bs: u32 = (0..n).map(|i| p.capacity.bs_residual(i, tt)).sum();
        let sat: u32 = (0..m).map(|i| p.capacity.sat_residual(i, tt)).sum();
        bs as usize >= k || sat as usize >= k
    })
}

#[test]
fn criterion_3_oracle_equivalence_on_tiny_instances() {
    let _g = lock();
    let clock = Instant::now();
    let (mut near, mut roomy, mut greedy_ok) = (0, 0, 0);
    for seed in 0..100 {
        let p = tiny_instance(seed);
        let opt = exhaustive_optimum(&p);
        let s = sca_solve(&p, &ScaConfig::default()).unwrap();
        if p.sum_rate(&s.assoc) >= 0.9 * opt {
            near += 1;
        }
        if greedy_has_room(&p) {
            roomy += 1;
            if check_feasibility(&greedy_assign(&p.channel, &p.capacity), &p.capacity).is_empty() {
                greedy_ok += 1;
            }
        }
    }
    let pass = near >= 80 && greedy_ok == roomy;
    let detail = format!("SCA within 90% of optimum on {near}/100; greedy feasible on {greedy_ok}/{roomy} roomy instances");
    let ok = report(3, "oracle equivalence on tiny instances", pass, &detail, clock.elapsed(), Duration::from_secs(120));
    assert!(ok, "{detail}");
}

// ---------------------------------------------------------------------------
// 4. algorithm dominance
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_sca_dominates_greedy() {
    let _g = lock();
    let clock = Instant::now();
    let mut wins = 0;
    let mut gaps = Vec::new();
    for seed in 1..=20 {
        let c = ScenarioConfig { seed, ..ScenarioConfig::desk() };
        let r = run_scenario(&c).unwrap();
        if r.sum_rate_sca >= r.sum_rate_greedy {
            wins += 1;
        }
        gaps.push(r.sum_rate_sca / r.sum_rate_greedy);
    }
    let min_ratio = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let detail = format!("SCA >= greedy on {wins}/20 seeds, smallest SR ratio {min_ratio:.3}");
    let ok = report(4, "algorithm dominance", wins >= 18, &detail, clock.elapsed(), Duration::from_secs(1200));
    assert!(ok, "{detail}");
}

// ---------------------------------------------------------------------------
// 5. power-sweep trend
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_bs_power_sweep_dips_then_rises() {
    let _g = lock();
    let clock = Instant::now();
    let values = [30.0, 33.0, 36.0, 39.0, 42.0, 45.0];
    let t = sweep_power(&ScenarioConfig::strong_satellite(), PowerSide::Bs, &values).unwrap();
    let sr: Vec<f64> = t.rows.iter().map(|r| r.sr_sca).collect();
    let last = sr.len() - 1;
    let found = (1..last).find(|&i| sr[i] < sr[0] && sr[last] > sr[i]);
    let detail = format!(
        "SR {} | below start and end from {}, interior minimum {}",
        sr.iter().map(|v| format!("{v:.2}")).collect::<Vec<_>>().join(" "),
        found.map_or("none".into(), |i| format!("{} dBm", values[i])),
        t.interior_minimum().map_or("none".into(), |i| format!("{} dBm", values[i]))
    );
    let ok = report(5, "BS power sweep trend", found.is_some(), &detail, clock.elapsed(), Duration::from_secs(600));
    assert!(ok, "{detail}");
}

// ---------------------------------------------------------------------------
// 6. channel unit checks
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_channel_unit_checks() {
    let _g = lock();
    let clock = Instant::now();
    let lambda = SPEED_OF_LIGHT / 3.4e9;
    let fspl = free_space_loss_db(100.0, lambda);
    let fspl_oracle = 20.0 * (4.0 * std::f64::consts::PI * 100.0 * 3.4e9 / 299_792_458.0).log10();
    let fspl_ok = (fspl - fspl_oracle).abs() <= 1e-6 && ((fspl * 100.0).round() / 100.0 - 83.08).abs() <= 1e-6;

    let nm = NoiseModel { bandwidth_hz: 20e6, noise_figure_db: 1.2, antenna_temperature_k: 150.0 };
    let sigma_db = 10.0 * noise_power(&nm).log10();
    let sigma_oracle =
        10.0 * (1.380_649e-23 * (150.0 + T0_KELVIN * (10f64.powf(0.12) - 1.0)) * 20e6).log10();
    let sigma_ok = (sigma_db + 131.74).abs() <= 0.01 && (sigma_db - sigma_oracle).abs() < 1e-9;

    let sp = SatPattern::default();
    let ka = 2.0 * std::f64::consts::PI * sp.aperture_radius_m / sp.wavelength_m;
    let null_theta = (3.8317 / ka).asin();
    let null_gain = sat_gain(&sp, null_theta);
    let floor = sp.max_gain_dbi + sp.floor_rel_db;
    let null_ok = (null_gain - floor).abs() < 1e-9 && bessel_j1(3.8317).abs() < 1e-4;

    let ue = ue_gain(&UeArray::new(UePattern::default()), 0.0, 0.0);
    let ue_ok = (ue - 12.0).abs() <= 0.05;

    let period = orbital_period(500e3);
    let period_ok = (period - 5677.0).abs() <= 1.0;

    let pass = fspl_ok && sigma_ok && null_ok && ue_ok && period_ok;
    let detail = format!(
        "FSPL {fspl:.6} dB (rounds to 83.08), noise {sigma_db:.4} dBW, gain at u=3.8317 {null_gain:.3} dBi (floor {floor}), UE boresight {ue:.4} dBi, period {period:.2} s"
    );
    let ok = report(6, "channel unit checks", pass, &detail, clock.elapsed(), Duration::from_secs(5));
    assert!(ok, "{detail}");
}

// ---------------------------------------------------------------------------
// 7. heatmap pipeline
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_heatmap_shadowing() {
    let _g = lock();
    let clock = Instant::now();
    let cfg = ScenarioConfig::desk();
    let set = emit_heatmaps(&cfg, &[0]).unwrap();
    let world = istn::expcli::World::build(&cfg).unwrap();
    let s = &world.scene;
    let ntn = &set.maps.iter().find(|m| m.side == istn::channel::LinkSide::Ntn).unwrap().cinr_db;
    let (rows, cols) = ntn.dim();
    let dims_ok = (rows, cols) == (s.city.seg_rows * 100, s.city.seg_cols * 100);
    let (mut shadow, mut los) = (Vec::new(), Vec::new());
    for r in (0..rows).step_by(3) {
        for q in (0..cols).step_by(3) {
            let p = set.spec.point(s, r, q);
            let indoor = s.city.buildings.iter().any(|b| p.x > b.x && p.x < b.x + b.w && p.y > b.y && p.y < b.y + b.d);
            if indoor {
                continue;
            }
            let blocked: Vec<bool> = (0..s.n_sat()).map(|m| is_blocked(&s.city, &p, &s.sat_positions[m][0])).collect();
            if blocked.iter().all(|&b| b) {
                shadow.push(ntn[[r, q]]);
            } else if blocked.iter().all(|&b| !b) {
                los.push(ntn[[r, q]]);
            }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (ms, ml) = (mean(&shadow), mean(&los));
    let sampled = shadow.len() + los.len();
    let pass = dims_ok && sampled >= 500 && !shadow.is_empty() && ml - ms >= 3.0;
    let detail = format!(
        "grid {rows}x{cols}; {} shadowed points mean {ms:.2} dB, {} LoS points mean {ml:.2} dB, separation {:.2} dB",
        shadow.len(),
        los.len(),
        ml - ms
    );
    let ok = report(7, "heatmap pipeline", pass, &detail, clock.elapsed(), Duration::from_secs(300));
    assert!(ok, "{detail}");
}

// ---------------------------------------------------------------------------
// 8. determinism through the command line
// ---------------------------------------------------------------------------

fn istn(args: &[&str], out: &Path) -> RunManifest {
    let status = Command::new(env!("CARGO_BIN_EXE_istn"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RUST_LOG", "warn")
        .status()
        .unwrap();
    assert!(status.success(), "istn {args:?} failed with {status}");
    RunManifest::read(out).unwrap()
}

#[test]
fn criterion_8_same_seed_same_bytes() {
    let _g = lock();
    let clock = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let reference = tmp.path().join("reference.json");
    std::fs::write(&reference, ScenarioConfig::strong_satellite().to_json_pretty()).unwrap();
    let reference = reference.to_str().unwrap().to_string();
    let commands: Vec<(&str, Vec<&str>)> = vec![
        ("run", vec!["run", "--seed", "1"]),
        ("sweep", vec!["sweep", "--side", "bs", "--values", "30,33,36,39,42,45", "--config", &reference]),
        ("heatmap", vec!["heatmap", "--slots", "0", "--seed", "1"]),
        ("timeline", vec!["timeline", "--ue", "0", "--seed", "1"]),
        ("pattern-dump", vec!["pattern-dump"]),
    ];
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, args) in &commands {
        let (a, b) = (tmp.path().join(format!("{name}-a")), tmp.path().join(format!("{name}-b")));
        let (ma, mb) = (istn(args, &a), istn(args, &b));
        let sa: Vec<_> = ma.stable_files().collect();
        let sb: Vec<_> = mb.stable_files().collect();
        let mut same = sa == sb;
        for f in &sa {
            same &= std::fs::read(a.join(&f.name)).unwrap() == std::fs::read(b.join(&f.name)).unwrap();
        }
        pass &= same;
        notes.push(format!("{name} {} files {}", sa.len(), if same { "identical" } else { "DIFFER" }));
    }
    let detail = notes.join(", ");
    let ok = report(8, "determinism", pass, &detail, clock.elapsed(), Duration::from_secs(600));
    assert!(ok, "{detail}");
}
