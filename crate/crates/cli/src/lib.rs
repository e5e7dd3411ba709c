//! Command-line front end: `direction`, `halfspace-certify`,
//! `family-certify`, `dirichlet-demo` and `plot-data`.
//!
//! Exit codes: 0 pass, 1 certificate failure, 2 usage or I/O error,
//! 3 inconclusive.

use std::ffi::OsString;

use clap::{Parser, Subcommand};
use slowhom::family::Verdict;

pub mod commands;
pub mod config;
pub mod output;
pub mod plot;
pub mod report;

pub use config::RunConfig;
pub use output::{Artifact, SCHEMA_VERSION};

pub const EXIT_USAGE: i32 = 2;
pub const THREADS_ENV: &str = "SLOWHOM_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}: {1}")]
    Io(String, std::io::Error),
    #[error("could not serialize report: {0}")]
    Report(String),
}

#[derive(Parser, Debug)]
#[command(name = "slowhom", version, about = "Certified slow-convergence constructions for periodic homogenization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build and verify a badly approximable lattice direction.
    Direction(commands::DirectionArgs),
    /// Certify slow decay of a half-space boundary layer.
    HalfspaceCertify(commands::HalfspaceArgs),
    /// Certify slow convergence for a boundary profile family.
    FamilyCertify(commands::FamilyArgs),
    /// Run the Dirichlet problem demo on the prototype domain.
    DirichletDemo(commands::DemoArgs),
    /// Extract a CSV table from an artifact.
    PlotData(commands::PlotArgs),
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    // a second call in the same process finds the pool already built
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `argv` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let outcome = configure_threads().and_then(|_| match &cli.command {
        Command::Direction(a) => commands::direction(a),
        Command::HalfspaceCertify(a) => commands::halfspace(a),
        Command::FamilyCertify(a) => commands::family(a),
        Command::DirichletDemo(a) => commands::demo(a),
        Command::PlotData(a) => commands::plot(a),
    });
    match outcome {
        Ok(v) => output::exit_code(v),
        Err(e) => {
            eprintln!("slowhom: {e}");
            EXIT_USAGE
        }
    }
}

pub fn verdict_exit_code(v: Verdict) -> i32 {
    output::exit_code(v)
}
