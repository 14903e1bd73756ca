use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use weighted_hammerstein::cli::{run_scenario, Command, Overrides};

/// Run a scenario: solve, verify, windows, classify or demo-projectile.
#[derive(Parser)]
#[command(version, about)]
struct Args {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, value_enum)]
    command: Command,
    /// output directory, overrides the scenario
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    grid_size: Option<usize>,
    /// Picard tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// seed for the sampled certificates
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let overrides = Overrides { out: args.out, grid_size: args.grid_size, tol: args.tol, seed: args.seed };
    match run_scenario(&args.scenario, args.command, &overrides, &mut std::io::stdout()) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e.record()).unwrap());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
