//! `drb`: config-driven direct randomized benchmarking toolkit front end.
//!
//! Exit codes: 0 success, 2 configuration/schema error, 3 runtime error.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

/// CLI failure, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or schema: exit code 2.
    Config(String),
    /// Execution failure: exit code 3.
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<drb_core::error::Error> for CliError {
    fn from(e: drb_core::error::Error) -> CliError {
        CliError::Runtime(e.to_string())
    }
}

/// Map a core error raised while interpreting the config to exit code 2.
pub(crate) fn cfg_err(e: drb_core::error::Error) -> CliError {
    CliError::Config(e.to_string())
}

#[derive(Parser)]
#[command(name = "drb", version, about = "Direct randomized benchmarking toolkit")]
pub struct Cli {
    /// Cap on worker threads (does not change results).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Sample the benchmarking circuits for a config and write the suite.
    Generate { config: PathBuf },
    /// Execute a suite under the config's error model and write the dataset.
    Run {
        config: PathBuf,
        /// Suite file (default: <output.dir>/suite.jsonl).
        #[arg(long)]
        suite: Option<PathBuf>,
    },
    /// Fit the decay and write the report plus a plot table.
    Analyze {
        config: PathBuf,
        /// Dataset file (default: <output.dir>/dataset.json).
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Superchannel-theory predictions (spectrum, γ, r_γ, expansions).
    Theory { config: PathBuf },
    /// Operator-spreading report for the config's connectivity.
    Scramble { config: PathBuf },
    /// Check the configured gate-set family against the 2-design criteria.
    Designcheck { config: PathBuf },
    /// Direct vs Clifford-group RB side by side (generate + run + analyze).
    Compare { config: PathBuf },
    /// Emit a gnuplot script for the decay-curve plot table.
    Plot { config: PathBuf },
}

/// Parse arguments and dispatch; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // Clap handles --help/--version as "errors" with code 0.
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(threads) = cli.threads {
        // Ignore failure: the global pool can only be built once per process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match commands::dispatch(&cli.cmd) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
