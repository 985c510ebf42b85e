use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qkin_cli::{run, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "qkin", about = "Quantum kinematics demo runner", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a demo described by a JSON config file.
    Run {
        /// Path to the run config.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides config and QKIN_OUT_DIR).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Classicality threshold override for decoherence runs.
        #[arg(long)]
        threshold: Option<f64>,
        /// Worker threads for parallel seed replicas (default sequential).
        #[arg(long)]
        parallel: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            threshold,
            parallel,
        } => {
            let config = match RunConfig::from_path(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(2);
                }
            };
            let overrides = Overrides {
                out,
                threshold,
                parallel,
            };
            match run(&config, &overrides) {
                Ok(outcome) => {
                    for artifact in &outcome.artifacts {
                        println!("wrote {}", artifact.display());
                    }
                    if outcome.pass {
                        println!("all checks passed");
                        ExitCode::SUCCESS
                    } else {
                        println!("checks FAILED");
                        ExitCode::FAILURE
                    }
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
