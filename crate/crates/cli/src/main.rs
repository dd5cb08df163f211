//! `twophase`: command-line driver for the two-phase heat conduction laboratory.
//!
//! Exit codes:
//!
//! | code | outcome |
//! |---|---|
//! | 0 | success |
//! | 1 | malformed config, flag or argument, or an I/O failure |
//! | 2 | infeasible parameters |
//! | 3 | truncation budget exceeded |
//! | 4 | linear solver did not converge |
//! | 5 | invalid domain spec |
//! | 6 | completed, but a study assertion failed or the gap is not certified |

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use twophase::Error;

#[derive(Debug, Parser)]
#[command(
    name = "twophase",
    version,
    about = "Two-phase heat conduction laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// Plain-text `key = value` config; its keys override the command defaults.
    #[arg(long, global = true)]
    pub(crate) config: Option<PathBuf>,
    /// Directory for CSV, report and metadata files.
    #[arg(long, global = true)]
    pub(crate) out: Option<PathBuf>,
    /// Maximum number of concurrent solver runs.
    #[arg(long, global = true, default_value_t = 1)]
    pub(crate) threads: usize,
    /// Same as `--set tol=X`.
    #[arg(long, global = true)]
    pub(crate) tol: Option<f64>,
    /// Override one config key, `key=value`; may be repeated.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub(crate) set: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Derive (ε, δ) and the asymptotic bounds of the oscillation construction.
    Params,
    /// Validate a domain spec and report its structure.
    GeometryCheck,
    /// Evaluate the exact constant-σ series for u(0, t) on a shell domain.
    Series,
    /// Run the solver and write the probe time series.
    Simulate,
    /// Run one of the headline studies.
    Experiment {
        #[arg(value_enum)]
        study: Study,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Study {
    Selfsim,
    Stabilize,
    Oscillate,
}

/// Outcome of a command that ran to completion.
pub enum Outcome {
    Ok,
    AssertionFailed,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Infeasible(_) | Error::NotSatisfiable(_)) => 2,
        Some(Error::BudgetExceeded { .. }) => 3,
        Some(Error::NonConvergence { .. }) => 4,
        Some(Error::InvalidSpec(_) | Error::PNotInRegion | Error::AntipodeInRegion) => 5,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Params => commands::params(&cli.common),
        Command::GeometryCheck => commands::geometry_check(&cli.common),
        Command::Series => commands::series(&cli.common),
        Command::Simulate => commands::simulate(&cli.common),
        Command::Experiment { study } => commands::experiment(&cli.common, study),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::AssertionFailed) => ExitCode::from(6),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
