//! Prints a preset as JSON: `default_config [desk|full_area|strong_satellite]`.

use istn::expcli::ScenarioConfig;

fn main() {
    let cfg = match std::env::args().nth(1).as_deref() {
        None | Some("desk") => ScenarioConfig::desk(),
        Some("full_area") => ScenarioConfig::full_area(),
        Some("strong_satellite") => ScenarioConfig::strong_satellite(),
        Some(other) => {
            eprintln!("unknown preset {other}");
            std::process::exit(2);
        }
    };
    println!("{}", cfg.to_json_pretty());
}
