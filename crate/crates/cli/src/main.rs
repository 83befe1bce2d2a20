//! `levysim` — run, validate, and export the imaging-collapse experiments.

mod config;
mod error;
mod export;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use error::CliError;

#[derive(Parser)]
#[command(
    name = "levysim",
    version,
    about = "Simulations of imaging-engineered quantum collapse, stable-noise measurements, and anomalous diffusion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the experiment described by a config file.
    Run {
        /// Path to a `key = value` config file.
        config: PathBuf,
    },
    /// Parse and schema-check a config file without running it.
    Validate { config: PathBuf },
    /// Export plot-ready CSV series for one figure from a completed run.
    Export {
        run_dir: PathBuf,
        /// One of fig2..fig7.
        figure_id: String,
    },
    /// Aperture preset registry.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    /// List the registered aperture presets with their capture numbers.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let payload = serde_json::json!({
                "error": {
                    "category": e.category(),
                    "message": e.to_string(),
                }
            });
            eprintln!("{payload}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config } => {
            let cfg = RunConfig::from_file(&config)?;
            runner::run(&cfg)?;
            println!(
                "run complete: experiment {} -> {}",
                cfg.experiment,
                cfg.output_dir.display()
            );
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = RunConfig::from_file(&config)?;
            println!(
                "valid: experiment {}, master_seed {}, workers {}, output {}",
                cfg.experiment,
                cfg.master_seed,
                cfg.workers,
                cfg.output_dir.display()
            );
            Ok(())
        }
        Command::Export { run_dir, figure_id } => {
            let written = export::export(&run_dir, &figure_id)?;
            for path in written {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Presets {
            action: PresetAction::List,
        } => {
            print!("{}", runner::preset_listing()?);
            Ok(())
        }
    }
}
