//! Experiment driver for the downlink sensing-and-communication analysis.
//!
//! Subcommands reproduce the standard evaluation sweeps over a plain-text
//! spec file: `op` (outage probability), `ecr` (ergodic communication rate),
//! `sr` (sensing rate), and `region` (rate-region boundaries, containment,
//! and the auxiliary-region sandwich). Outputs are CSVs plus a JSON report
//! carrying the resolved spec.
//!
//! Everything is deterministic in the spec's seed: re-running any subcommand
//! with the same file produces byte-identical CSVs regardless of the thread
//! count (`--threads`, or the `ISAC_REGION_THREADS` fallback).
//!
//! Exit codes: 0 success, 1 numerical failure, 2 validation failure.

mod commands;
mod output;
mod spec;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::spec::ExperimentSpec;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "{m}"),
            CliError::Numerical(m) => write!(f, "{m}"),
            CliError::Io(e) => write!(f, "i/o failure: {e}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<isac_core::montecarlo::McError> for CliError {
    fn from(e: isac_core::montecarlo::McError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<isac_core::allocation::AllocError> for CliError {
    fn from(e: isac_core::allocation::AllocError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<isac_core::rates::RateError> for CliError {
    fn from(e: isac_core::rates::RateError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<isac_core::region::RegionError> for CliError {
    fn from(e: isac_core::region::RegionError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "isac-region",
    version,
    about = "Downlink MIMO sensing-and-communication performance sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment spec file (`key = value` lines, `#` comments).
    #[arg(long)]
    spec: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Worker thread cap; falls back to ISAC_REGION_THREADS, then all cores.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Outage probability of the sum communication rate over the SNR grid.
    Op(RunArgs),
    /// Ergodic communication rate with closed-form and asymptote columns.
    Ecr(RunArgs),
    /// Sensing rate with asymptote columns.
    Sr(RunArgs),
    /// Rate-region boundaries, containment check, and auxiliary sandwich.
    Region(RunArgs),
}

fn thread_cap(args: &RunArgs) -> Result<usize, CliError> {
    if let Some(n) = args.threads {
        return Ok(n);
    }
    match std::env::var("ISAC_REGION_THREADS") {
        Ok(v) => v.trim().parse().map_err(|_| {
            CliError::Validation(format!(
                "ISAC_REGION_THREADS must be an unsigned integer, got `{v}`"
            ))
        }),
        Err(_) => Ok(0),
    }
}

type CommandFn = fn(&ExperimentSpec, &std::path::Path) -> Result<(), CliError>;

fn execute(args: &RunArgs, run: CommandFn) -> Result<(), CliError> {
    let spec = ExperimentSpec::load(&args.spec)?;
    let threads = thread_cap(args)?;
    std::fs::create_dir_all(&args.out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Numerical(format!("thread pool: {e}")))?;
    pool.install(|| run(&spec, &args.out))
}

fn main() {
    let cli = Cli::parse();
    let (args, run): (&RunArgs, CommandFn) = match &cli.command {
        Command::Op(a) => (a, commands::cmd_op),
        Command::Ecr(a) => (a, commands::cmd_ecr),
        Command::Sr(a) => (a, commands::cmd_sr),
        Command::Region(a) => (a, commands::cmd_region),
    };
    match execute(args, run) {
        Ok(()) => {}
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
