//! `mesa`: experiment driver for distributed pose-graph optimization.
//!
//! Subcommands:
//!   generate  synthesize a multi-robot problem file
//!   run       run one method on a problem file, writing trace + summary
//!   compare   merge the traces in a directory into one summary table
//!   bench     ingest a g2o file, partition it among robots, then run
//!
//! Exit codes: 0 converged, 3 communication budget exhausted before the
//! consensus gap closed, 4 solver failure (e.g. an indefinite system),
//! 1 anything else, 2 usage errors (from the argument parser).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use mesa::baselines::BaselineError;
use mesa::datasets::DatasetError;
use mesa::factorgraph::FactorGraphError;
use mesa::mesa::{ConstraintKind, MesaError};
use mesa::metrics::MetricsError;
use mesa::netsim::{NetsimError, ScheduleMode};

use commands::RunOverrides;

pub const EXIT_OK: u8 = 0;
pub const EXIT_BUDGET_EXHAUSTED: u8 = 3;
pub const EXIT_SOLVER_FAILURE: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Mesa(#[from] MesaError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Graph(#[from] FactorGraphError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Netsim(#[from] NetsimError),
}

impl CliError {
    fn config(line: usize, message: impl std::fmt::Display) -> Self {
        CliError::Config(format!("line {line}: {message}"))
    }

    fn exit_code(&self) -> u8 {
        let graph = match self {
            CliError::Graph(e) => Some(e),
            CliError::Mesa(MesaError::Graph(e)) => Some(e),
            CliError::Baseline(BaselineError::Graph(e)) => Some(e),
            _ => None,
        };
        match graph {
            Some(FactorGraphError::IndefiniteSystem | FactorGraphError::NonFiniteResidual) => {
                EXIT_SOLVER_FAILURE
            }
            _ => 1,
        }
    }
}

/// Optimization method: four MESA constraint kinds plus two baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Geodesic,
    Split,
    ApxGeo,
    Chordal,
    Centralized,
    Independent,
}

impl Method {
    fn kind(self) -> Option<ConstraintKind> {
        match self {
            Method::Geodesic => Some(ConstraintKind::Geodesic),
            Method::Split => Some(ConstraintKind::Split),
            Method::ApxGeo => Some(ConstraintKind::ApproxGeodesic),
            Method::Chordal => Some(ConstraintKind::Chordal),
            Method::Centralized | Method::Independent => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScheduleArg {
    RoundRobin,
    Random,
}

impl From<ScheduleArg> for ScheduleMode {
    fn from(arg: ScheduleArg) -> Self {
        match arg {
            ScheduleArg::RoundRobin => ScheduleMode::RoundRobin,
            ScheduleArg::Random => ScheduleMode::UniformRandom,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mesa", version, about = "Distributed pose-graph optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Debug, clap::Args)]
struct RunFlags {
    /// Config file (ini-style sections, see README)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Initial penalty weight (overrides config)
    #[arg(long)]
    beta0: Option<f64>,
    /// Penalty growth factor (overrides config)
    #[arg(long)]
    alpha: Option<f64>,
    /// Communication budget in pairwise events
    #[arg(long)]
    budget: Option<usize>,
    /// Edge activation order
    #[arg(long, value_enum)]
    schedule: Option<ScheduleArg>,
    /// Probability that a scheduled event is dropped
    #[arg(long)]
    drop_prob: Option<f64>,
    /// Schedule seed
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for trace/summary/manifest files
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

impl RunFlags {
    fn overrides(&self) -> RunOverrides {
        RunOverrides {
            beta0: self.beta0,
            alpha: self.alpha,
            budget: self.budget,
            schedule: self.schedule.map(Into::into),
            drop_prob: self.drop_prob,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Commands {
    /// Generate a synthetic multi-robot problem file
    Generate {
        /// Config file with a [synthetic] section
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output problem file
        #[arg(long)]
        out: PathBuf,
        /// Override the dataset seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run one method on a problem file
    Run {
        /// Problem file produced by `generate` or `bench --save-problem`
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Merge every *.trace.csv in a directory into one summary CSV
    Compare {
        /// Directory holding trace files and their manifests
        #[arg(long)]
        dir: PathBuf,
        /// Output summary CSV
        #[arg(long)]
        out: PathBuf,
    },
    /// Partition a g2o benchmark among robots and run a method on it
    Bench {
        /// Input pose graph in g2o format
        #[arg(long)]
        g2o: PathBuf,
        /// Number of parts when no partition file is given
        #[arg(long, default_value_t = 5)]
        parts: usize,
        /// METIS-style partition file (one part id per vertex line)
        #[arg(long)]
        partition_file: Option<PathBuf>,
        /// Write the partitioned problem to this path
        #[arg(long)]
        save_problem: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Method::Geodesic)]
        method: Method,
        /// Constraint kind override for MESA methods
        #[arg(long, value_enum)]
        kind: Option<Method>,
        #[command(flatten)]
        flags: RunFlags,
    },
}

fn dispatch(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Commands::Generate { config, out, seed } => {
            commands::cmd_generate(config.as_deref(), &out, seed)
        }
        Commands::Run { problem, method, flags } => commands::cmd_run(
            &problem,
            method,
            flags.config.as_deref(),
            &flags.overrides(),
            &flags.out_dir,
        ),
        Commands::Compare { dir, out } => commands::cmd_compare(&dir, &out),
        Commands::Bench {
            g2o,
            parts,
            partition_file,
            save_problem,
            method,
            kind,
            flags,
        } => {
            let method = match kind {
                None => method,
                Some(k) if k.kind().is_some() => k,
                Some(k) => {
                    return Err(CliError::Config(format!(
                        "--kind expects a constraint kind, not the {:?} baseline",
                        k
                    )))
                }
            };
            commands::cmd_bench(
                &g2o,
                parts,
                partition_file.as_deref(),
                save_problem.as_deref(),
                method,
                flags.config.as_deref(),
                &flags.overrides(),
                &flags.out_dir,
            )
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
