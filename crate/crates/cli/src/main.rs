//! Command-line front end for the swinging-cavity simulator.
//!
//! Exit status: 0 on success, 1 for configuration or domain errors, 2 when
//! `compare` finds the two solvers outside the configured tolerances.

mod commands;
mod config;
mod error;
mod table;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{Overrides, RunConfig};
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(
    name = "swing-casimir",
    version,
    about = "Particle creation in a cavity swinging about its z-axis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Overrides,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Mode frequencies of the n_z block, sorted
    Spectrum,
    /// Mode pairs whose frequencies add up to the drive frequency
    Resonances,
    /// Slow-time amplitudes of the resonant modes
    Msa,
    /// Real-time integration of the truncated coupled-mode system
    Direct,
    /// Direct integration against the slow-time prediction
    Compare,
    /// Direct runs over a grid of drive frequencies
    Sweep,
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = RunConfig::resolve(&cli.flags)?;
    match cli.command {
        Command::Spectrum => commands::spectrum(&cfg),
        Command::Resonances => commands::resonances(&cfg),
        Command::Msa => commands::msa(&cfg),
        Command::Direct => commands::direct(&cfg),
        Command::Compare => commands::compare(&cfg),
        Command::Sweep => commands::sweep(&cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's own exit code 2 would collide with the tolerance status
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
