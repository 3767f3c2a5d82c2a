mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crate::commands::{dispatch, Command};
use crate::config::load_config;

/// Numerical lab for partially integrable Hamiltonian systems.
#[derive(Debug, Parser)]
#[command(name = "pistlab", version)]
struct Cli {
    /// What to run.
    #[arg(value_enum)]
    command: Command,
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for every stochastic step; overrides `experiment.seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = load_config(&cli.config, cli.seed, cli.out.as_deref()).and_then(|cfg| dispatch(cli.command, &cfg));
    match result {
        Ok((status, manifest)) => {
            for f in &manifest.files {
                println!("{}", f.file);
            }
            ExitCode::from(status)
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
