//! `cogpower`: command-line front end for the cognitive power control
//! simulator.
//!
//! Subcommands: `cg-policy` (constrained delayed-CSI policy curve), `sweep`
//! (Monte Carlo throughput trade-off sweep), `trace` (per-packet dump of one
//! run), `validate` (numerical invariant suite). Exit codes: 0 success,
//! 1 configuration error, 2 numeric/infeasibility error, 3 validation failure.

mod commands;
mod config;
mod svg;

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0} validation checks failed")]
    Validation(usize),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Validation(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(name = "cogpower", version, about = "Cognitive power control simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the outage-constrained delayed-CSI power policy and write the
    /// gamma,power curve
    CgPolicy(RunArgs),
    /// Monte Carlo sweep over the weighting parameter; one CSV row per
    /// (beta, policy, alpha, model)
    Sweep(RunArgs),
    /// Per-packet trace of a single realization
    Trace(TraceArgs),
    /// Run the numerical invariant checks
    Validate,
}

#[derive(Args)]
pub struct RunArgs {
    /// JSON configuration file
    #[arg(long)]
    pub config: PathBuf,
    /// Output CSV path
    #[arg(long)]
    pub out: PathBuf,
    /// Override the config's master seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write a simple SVG plot next to the CSV
    #[arg(long)]
    pub svg: bool,
}

#[derive(Args)]
pub struct TraceArgs {
    /// JSON configuration file
    #[arg(long)]
    pub config: PathBuf,
    /// Output CSV path
    #[arg(long)]
    pub out: PathBuf,
    /// Override the config's master seed
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Cap worker parallelism from `COGPOWER_THREADS` (default: available cores).
fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("COGPOWER_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        CliError::Config(format!("COGPOWER_THREADS must be a positive integer, got {raw:?}"))
    })?;
    if n == 0 {
        return Err(CliError::Config("COGPOWER_THREADS must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot configure thread pool: {e}")))?;
    }
    Ok(())
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => std::process::exit(0),
                _ => std::process::exit(1),
            }
        }
    };

    let result = init_threads().and_then(|()| match &cli.command {
        Command::CgPolicy(args) => commands::cg_policy(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Trace(args) => commands::trace(args),
        Command::Validate => commands::run_validate(),
    });

    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
