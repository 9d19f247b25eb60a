//! Command-line front end: sampling, annealing, bound reports, diagnostics and
//! the LDA temperature sweep. Every command writes CSV with a header row.

pub mod anneal;
pub mod bounds;
pub mod config;
pub mod diagnose;
pub mod lda;
pub mod output;
pub mod sample;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::CommonArgs;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Core(#[from] annealed_walk::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    /// A checked inequality failed; the report has already been written.
    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::CheckFailed(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "annealed-walk", version, about = "Annealed random-walk samplers and their bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the walk at a fixed exponent and write final states.
    Sample(sample::SampleArgs),
    /// Run an annealing schedule and write final states plus a stage log.
    Anneal(anneal::AnnealArgs),
    /// Exponent and run-length bounds for a graph and vertex density.
    Bounds(bounds::BoundsArgs),
    /// Invariant battery on small exact instances.
    Diagnose(diagnose::DiagnoseArgs),
    /// Temperature sweep of the collapsed Gibbs sampler.
    Lda(lda::LdaArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Sample(a) => &a.common,
            Command::Anneal(a) => &a.common,
            Command::Bounds(a) => &a.common,
            Command::Diagnose(a) => &a.common,
            Command::Lda(a) => &a.common,
        }
    }
}

/// Runs one command, writing its main CSV to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let config = cli.command.common().config.clone();
    let config = config.as_deref();
    match cli.command {
        Command::Sample(a) => sample::run(&config::merge(&a, config, "sample")?, stdout),
        Command::Anneal(a) => anneal::run(&config::merge(&a, config, "anneal")?, stdout),
        Command::Bounds(a) => bounds::run(&config::merge(&a, config, "bounds")?, stdout),
        Command::Diagnose(a) => diagnose::run(&config::merge(&a, config, "diagnose")?, stdout),
        Command::Lda(a) => lda::run(&config::merge(&a, config, "lda")?, stdout),
    }
}

/// Parses `std::env::args`, runs, and maps errors to exit codes.
pub fn main_entry() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(cli, &mut lock) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = lock.flush();
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
