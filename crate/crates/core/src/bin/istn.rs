use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use istn::expcli::{
    emit_cinr_timeline, emit_heatmaps, pattern_dump, run_scenario, sweep_power, PowerSide, RunManifest, ScenarioConfig,
};

#[derive(Parser)]
#[command(name = "istn", version, about = "Satellite/terrestrial association simulator")]
struct Cli {
    /// Scenario JSON; defaults to the built-in desk scenario.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configuration seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the scenario with both algorithms and write all tables.
    Run,
    /// Sum rate against maximum transmit power.
    Sweep {
        #[arg(long)]
        side: PowerSide,
        /// dBm for `bs`, dBW for `sat`; strictly increasing.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        values: Vec<f64>,
    },
    /// TN and NTN CINR maps for the given slots.
    Heatmap {
        #[arg(long, value_delimiter = ',', required = true)]
        slots: Vec<usize>,
    },
    /// Per-link CINR of one UE over every slot.
    Timeline {
        #[arg(long)]
        ue: usize,
    },
    /// Antenna pattern cuts.
    PatternDump,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(m) => {
            println!("wrote {} files to {}", m.files.len() + 1, cli.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: &Cli) -> istn::Result<RunManifest> {
    let mut cfg = match &cli.config {
        Some(p) => ScenarioConfig::from_file(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let out = &cli.out;
    match &cli.cmd {
        Cmd::Run => {
            let r = run_scenario(&cfg)?;
            println!("sum rate  sca {:.6}  greedy {:.6} bps/Hz", r.sum_rate_sca, r.sum_rate_greedy);
            println!("sca iterations {} (converged: {})", r.sca.trace.iterations(), r.sca.trace.converged);
            if !r.sca.unserved.is_empty() {
                println!("{} (slot, ue) pairs left unserved", r.sca.unserved.len());
            }
            r.write(out)
        }
        Cmd::Sweep { side, values } => {
            let t = sweep_power(&cfg, *side, values)?;
            for r in &t.rows {
                println!("{:7.2}  sca {:.6}  greedy {:.6}", r.power, r.sr_sca, r.sr_greedy);
            }
            match t.interior_minimum() {
                Some(i) => println!("interior minimum at {}", t.rows[i].power),
                None => println!("no interior minimum"),
            }
            t.write(out)
        }
        Cmd::Heatmap { slots } => emit_heatmaps(&cfg, slots)?.write(out),
        Cmd::Timeline { ue } => emit_cinr_timeline(&cfg, *ue)?.write(out),
        Cmd::PatternDump => pattern_dump(&cfg)?.write(out),
    }
}
