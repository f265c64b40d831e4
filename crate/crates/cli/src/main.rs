mod args;
mod commands;
mod io;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Failure classes with their exit codes: 2 for bad input, 3 for estimator
/// domain errors.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Domain(String),
}

impl From<curstat::Error> for CliError {
    fn from(e: curstat::Error) -> Self {
        if e.is_domain_error() {
            CliError::Domain(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("CURSTAT_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Input(format!(
            "CURSTAT_THREADS must be a positive integer, got \"{raw}\""
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Input(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match &cli.command {
        Command::Estimate(a) => commands::estimate(a),
        Command::Bandwidth(a) => commands::bandwidth(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::ReproduceTable1(a) => commands::reproduce_table1(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Domain(msg)) => {
            eprintln!("domain error: {msg}");
            ExitCode::from(3)
        }
    }
}
