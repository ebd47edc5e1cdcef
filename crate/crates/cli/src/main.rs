use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mcsim::config::{load_config, Scenario};
use mcsim::sweep::run_scenario;

/// AR/VR downlink traffic balancing over FR1/FR2 multi-connectivity.
#[derive(Parser)]
#[command(name = "mcsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single UE at each configured distance.
    SweepDistance(Common),
    /// UEs dropped uniformly in the cell, for each configured UE count.
    SweepCapacity(Common),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key; repeatable, wins over the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory for the CSV files and the summary.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Number of seeded runs per point (overrides `runs`).
    #[arg(long)]
    seeds: Option<usize>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
}

fn run(scenario: Scenario, args: Common) -> Result<(), Box<dyn std::error::Error>> {
    let mut overrides = vec![format!("scenario={}", scenario.name())];
    if let Some(n) = args.seeds {
        overrides.push(format!("runs={n}"));
    }
    overrides.extend(args.set);
    let cfg = load_config(args.config.as_deref(), &overrides)?;
    let out = run_scenario(&cfg, args.parallel.max(1))?;
    for path in out.write_to(&args.out)? {
        eprintln!("wrote {}", path.display());
    }
    print!("{}", out.summary);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (scenario, args) = match cli.command {
        Command::SweepDistance(a) => (Scenario::SingleUeDistanceSweep, a),
        Command::SweepCapacity(a) => (Scenario::MultiUeCapacitySweep, a),
    };
    match run(scenario, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
