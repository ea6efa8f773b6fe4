//! The `hheat` command line: config ingestion, the domain catalog, and the
//! geom, heat, fit, diag and validate commands.

pub mod catalog;
pub mod commands;
pub mod config;
pub mod csvout;
pub mod expr;
pub mod validate;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use config::{parse_tgrid, Overrides};

/// Failures surfaced by a command, each with a fixed process exit code.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("characteristic boundary: {0}")]
    Characteristic(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Characteristic(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Config(_) | CliError::Schema(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::CharacteristicDomain { .. } | Error::CharacteristicPoint { .. } => CliError::Characteristic(msg),
            Error::InvalidInput(_) => CliError::Config(msg),
            _ => CliError::Numerical(msg),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hheat", version, about = "Heat content of Heisenberg-group domains by exit-time Monte Carlo")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Volume, horizontal perimeter, mean curvature, characteristic scan, reach and predicted coefficients.
    Geom,
    /// Heat content estimates over the time grid.
    Heat,
    /// Fit c0 - c1 sqrt(t) + c2 t to a heat CSV and compare with the geometric prediction.
    Fit,
    /// Event decomposition of the boundary-layer deficit.
    Diag,
    /// Cross-module invariant suite.
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Geom => "geom",
            Command::Heat => "heat",
            Command::Fit => "fit",
            Command::Diag => "diag",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Paths per shell node (heat, diag).
    #[arg(long, global = true)]
    pub paths: Option<usize>,
    /// Time steps per path.
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Comma-separated time grid.
    #[arg(long, global = true, value_parser = parse_tgrid)]
    pub tgrid: Option<std::vec::Vec<f64>>,
    /// Substring selecting validate checks.
    #[arg(long, global = true)]
    pub filter: Option<String>,
    /// Heat CSV read by `fit` (default `<out>/heat.csv`).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
}

impl GlobalArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides { seed: self.seed, output_dir: self.out.clone(), n_paths: self.paths, n_steps: self.steps, t_grid: self.tgrid.clone() }
    }
}

/// Worker count from `HHEAT_THREADS`; unset or 0 means one per core.
fn thread_count() -> Result<usize, CliError> {
    match std::env::var("HHEAT_THREADS") {
        Err(_) => Ok(0),
        Ok(v) => v.trim().parse().map_err(|_| CliError::Config(format!("HHEAT_THREADS must be a nonnegative integer, got {v:?}"))),
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = thread_count().and_then(|n| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
        pool.install(|| commands::execute(cli.command, &cli.global))
    });
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("hheat {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}
