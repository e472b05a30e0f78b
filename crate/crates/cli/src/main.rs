//! `dirac-point`: reproducible experiments on Dirac point interactions.

mod commands;
mod config;
mod output;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dirac_point::Error;

use config::{Command, FileConfig};

#[derive(Debug, Parser)]
#[command(
    name = "dirac-point",
    version,
    about = "Point interactions for the 1D Dirac operator"
)]
struct Cli {
    /// JSON file with defaults; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Recorded in the output for provenance.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl CliError {
    pub fn from_core(field: &str, e: Error) -> Self {
        match e {
            Error::PoleOfW { .. }
            | Error::PoleOfTan { .. }
            | Error::SingularDenominator { .. }
            | Error::NearPole { .. }
            | Error::SingularSystem { .. }
            | Error::Eigen { .. }
            | Error::CrossCheck { .. } => CliError::Numerical(format!("{field}: {e}")),
            _ => CliError::Validation(format!("field `{field}`: {e}")),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

/// Sizes the global rayon pool from `DIRAC_POINT_THREADS`.
fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("DIRAC_POINT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Validation(format!(
            "DIRAC_POINT_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(format!("DIRAC_POINT_THREADS: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let output = cli.output.clone().or_else(|| file.output.clone());
    let seed = cli.seed.or(file.seed);
    let text = match cli.command.merged(&file) {
        Command::Convert(a) => commands::convert(&a, seed)?,
        Command::Eta(a) => commands::eta(&a, seed)?,
        Command::Spectrum(a) => commands::spectrum(&a, seed)?,
        Command::Converge(a) => commands::converge(&a, seed)?,
        Command::Renorm(a) => commands::renorm(&a, seed)?,
    };
    output::emit(&text, output.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
