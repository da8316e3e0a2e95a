//! Runs the desk scenario and compares Algorithm 1 with the greedy baseline.
//!
//! `cargo run --release --example greedy_vs_sca -- [seed]`

use istn::expcli::{run_scenario, ScenarioConfig};

fn main() -> istn::Result<()> {
    let seed = std::env::args().nth(1).map_or(1, |s| s.parse().expect("seed"));
    let cfg = ScenarioConfig { seed, ..ScenarioConfig::desk() };
    let r = run_scenario(&cfg)?;
    let (n_bs, n_sat, n_ue, n_t) = r.problem.dims();
    println!("{n_bs} BSs, {n_sat} satellites, {n_ue} UEs, {n_t} slots");
    println!("greedy SR {:.4} bps/Hz", r.sum_rate_greedy);
    println!("sca    SR {:.4} bps/Hz after {} iterations", r.sum_rate_sca, r.sca.trace.iterations());
    println!("relaxed SR at the last iterate {:.4}", r.sca.trace.rows.last().map_or(0.0, |t| t.relaxed_sum_rate));
    println!("wall time {:.2} s", r.wall_time_s);
    Ok(())
}
