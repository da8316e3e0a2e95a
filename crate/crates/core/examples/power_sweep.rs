//! Sum rate against maximum transmit power.
//!
//! `cargo run --release --example power_sweep -- sat 14 16 18 20`
//! `cargo run --release --example power_sweep -- bs 30 33 36 39 42 45`
//!
//! The BS sweep runs on the strong-satellite reference scenario, the
//! satellite sweep on the desk default.

use istn::expcli::{sweep_power, PowerSide, ScenarioConfig};

fn main() -> istn::Result<()> {
    let mut args = std::env::args().skip(1);
    let side: PowerSide = args.next().unwrap_or_else(|| "sat".into()).parse().expect("side");
    let mut values: Vec<f64> = args.map(|v| v.parse().expect("value")).collect();
    let cfg = match side {
        PowerSide::Bs => ScenarioConfig::strong_satellite(),
        PowerSide::Sat => ScenarioConfig::desk(),
    };
    if values.is_empty() {
        values = match side {
            PowerSide::Bs => vec![30.0, 33.0, 36.0, 39.0, 42.0, 45.0],
            PowerSide::Sat => vec![14.0, 16.0, 18.0, 20.0],
        };
    }
    let table = sweep_power(&cfg, side, &values)?;
    println!("power  SR_sca      SR_greedy   iterations");
    for r in &table.rows {
        println!("{:5.1}  {:10.4}  {:10.4}  {:3}{}", r.power, r.sr_sca, r.sr_greedy, r.iterations, if r.converged { "" } else { " (not converged)" });
    }
    match table.interior_minimum() {
        Some(i) => println!("interior minimum at {}", table.rows[i].power),
        None => println!("no interior minimum"),
    }
    Ok(())
}
