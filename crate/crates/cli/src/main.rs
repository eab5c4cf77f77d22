//! `toda-kdv`: spectral studies of the periodic Toda lattice against its
//! Hill and KdV limits.

mod error;
mod output;
mod scenario;
mod studies;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::output::{Format, Sink};
use crate::scenario::{ModeSelection, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    /// Jacobi spectrum from the dense and discriminant solvers.
    Spectrum,
    /// Hill spectra of H± and the scaled edge values.
    Hill,
    /// Rescaled Toda discriminant against the Hill discriminants.
    Discriminant,
    /// Renormalized Toda actions against the Hill actions.
    Actions,
    /// KdV pair flow: invariants and spectral drift of the Jacobi matrix.
    Kdv,
    /// Theta-function quasimode residuals.
    Quasimode,
    /// Edge, bulk, discriminant and action convergence with fitted rates.
    Converge,
}

#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    study: Study,

    /// Scenario JSON; every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (default: the scenario's `output`, else `.`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Hill scaling modes to report.
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeSelection>,

    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Seed for randomized profiles.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let scenario = match &cli.config {
        Some(path) => Scenario::load(path)?,
        None => Scenario::default(),
    };
    let out = cli.out.clone().or_else(|| scenario.output.clone().map(PathBuf::from)).unwrap_or_else(|| ".".into());
    let resolved = scenario.resolve(cli.study, cli.mode, cli.seed)?;
    let mut sink = Sink::new(&out, cli.format)?;
    studies::run(&resolved, &mut sink)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Config(e.to_string().trim_end().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
