//! Drive a scenario file through the same entry point as the command-line
//! tool and list what it wrote.
//!
//! ```bash
//! cargo run --release --example run_scenario -- scenarios/modified_projectile.json demo-projectile
//! ```

use std::path::PathBuf;

use clap::ValueEnum;
use weighted_hammerstein::cli::{run_scenario, Command, Overrides};

fn main() {
    let mut args = std::env::args().skip(1);
    let path = PathBuf::from(args.next().unwrap_or_else(|| "scenarios/modified_projectile.json".into()));
    let command = Command::from_str(&args.next().unwrap_or_else(|| "verify".into()), true).expect("unknown command");
    let out = std::env::temp_dir().join("weighted-hammerstein-example");
    let overrides = Overrides { out: Some(out), ..Default::default() };

    match run_scenario(&path, command, &overrides, &mut std::io::stdout()) {
        Ok(outcome) => {
            for a in outcome.artifacts {
                println!("wrote {}", a.display());
            }
        }
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e.record()).unwrap());
            std::process::exit(e.exit_code());
        }
    }
}
