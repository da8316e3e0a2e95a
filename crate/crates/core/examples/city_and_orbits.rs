//! Builds the desk scene and prints the city, the base-station sites and the
//! satellite elevations seen from the city centre over the time window.

use istn::expcli::{build_scene, ScenarioConfig};
use istn::scene::propagate_orbit;
use nalgebra::Vector3;

fn main() -> istn::Result<()> {
    let cfg = ScenarioConfig::desk();
    let scene = build_scene(&cfg)?;
    let city = &scene.city;
    println!(
        "city {:.0} m x {:.0} m, {} x {} segments, {} buildings",
        city.size_m[0],
        city.size_m[1],
        city.seg_cols,
        city.seg_rows,
        city.buildings.len()
    );
    for (i, s) in scene.sites.iter().enumerate() {
        println!(
            "BS {i}: ({:6.1}, {:6.1}, {:5.1}) m, sector {:5.1} deg",
            s.position.x, s.position.y, s.position.z, s.sector_azimuth_deg
        );
    }
    let (cx, cy) = city.center();
    let centre = Vector3::new(cx, cy, 1.5);
    for (m, o) in scene.orbits.iter().enumerate() {
        println!("satellite {m}: RAAN {:.3} deg, anomaly at epoch {:.3} deg, period {:.1} s", o.raan_deg, o.initial_anomaly_deg, o.period());
        for t in (0..scene.n_slots()).step_by(10) {
            let la = scene.look_angles(m, t, &centre);
            println!("  slot {t:2}: elevation {:5.1} deg, azimuth {:6.1} deg, range {:.0} km", la.elevation_deg, la.azimuth_deg, la.slant_range_m / 1e3);
        }
        let r0 = propagate_orbit(o, 0.0).norm();
        println!("  orbit radius {:.1} km", r0 / 1e3);
    }
    Ok(())
}
