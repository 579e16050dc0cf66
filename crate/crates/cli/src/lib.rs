//! Command-line front end: `gramspec analyze|verify|energy|roots <system.json>`.

pub mod commands;
pub mod document;
pub mod error;
pub mod model;
pub mod report;

use clap::{Parser, Subcommand};

pub use commands::Output;
pub use document::{emit_system, parse_system, SystemDocument};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "gramspec",
    version,
    about = "Spectral decompositions of controllability Gramians"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigen- and pair-indexed Gramian components with residuals
    Analyze(commands::AnalyzeArgs),
    /// Closed forms against the brute-force oracles
    Verify(commands::VerifyArgs),
    /// Minimum-energy partition for a target state
    Energy(commands::EnergyArgs),
    /// Characteristic polynomial, spectrum and solvability
    Roots(commands::Common),
}

impl Command {
    pub fn output_path(&self) -> Option<&std::path::Path> {
        match self {
            Command::Analyze(a) => a.common.output.as_deref(),
            Command::Verify(a) => a.common.output.as_deref(),
            Command::Energy(a) => a.common.output.as_deref(),
            Command::Roots(c) => c.output.as_deref(),
        }
    }
}

pub fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Analyze(a) => commands::analyze(a),
        Command::Verify(a) => commands::verify(a),
        Command::Energy(a) => commands::energy(a),
        Command::Roots(c) => commands::roots(c),
    }
}
