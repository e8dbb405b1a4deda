//! `gq`: generate, optimize, evaluate and sweep golden-angle quantizers.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{EvalArgs, GenArgs, ProfileArgs, RdArgs, SweepArgs};
use crate::config::CommonArgs;

#[derive(Debug, Parser)]
#[command(name = "gq", version, about = "Golden-angle quantizers for the complex Gaussian source")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Design a codebook and write it as JSON
    Gen(GenArgs),
    /// Evaluate a codebook file by Monte Carlo (plus optional grid outputs)
    Eval(EvalArgs),
    /// Distortion-rate table over schemes and codebook sizes
    Sweep(SweepArgs),
    /// Centroid magnitude against n/N for golden schemes
    Profile(ProfileArgs),
    /// Rate-distortion reference curve
    Rd(RdArgs),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<gq_core::Error> for CliError {
    fn from(e: gq_core::Error) -> Self {
        use gq_core::Error as E;
        let msg = e.to_string();
        match e {
            E::InvalidN { .. } | E::InvalidScheme(_) | E::InvalidVariance(_) | E::Domain(_) | E::IndexOutOfRange { .. } => {
                CliError::Usage(msg)
            }
            E::Io { .. } | E::Format { .. } => CliError::Data(msg),
            E::NonFiniteRadius { .. }
            | E::NegativeRadius { .. }
            | E::EmptyCodebook
            | E::NonFiniteCentroid { .. }
            | E::GridTooCoarse { .. }
            | E::EmptyCell { .. }
            | E::ZeroPower => CliError::Numerical(msg),
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("GQ_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("GQ_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Gen(a) => commands::gen(&a, &cli.common),
        Command::Eval(a) => commands::eval(&a, &cli.common),
        Command::Sweep(a) => commands::sweep(&a, &cli.common),
        Command::Profile(a) => commands::profile(&a, &cli.common),
        Command::Rd(a) => commands::rd(&a, &cli.common),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
