//! Command-line front end: `calibrate`, `run`, `simulate`, `bench`, `evaluate`.
//!
//! Exit codes: 0 success, 1 runtime or data failure, 2 usage or config error.

pub mod calibrate;
pub mod config;
pub mod evaluate;
pub mod run;
pub mod simulate;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use config::{ConfigFile, RunConfig, RunFlags, CONFIG_ENV};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
    /// The run finished but some frames could not be processed.
    #[error("{failed} frame(s) failed")]
    FramesFailed { failed: u64 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) | CliError::FramesFailed { .. } => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "proximity-sentinel", version, about = "Social-distancing and mask-compliance monitor")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derive the focal length from a reference photo measurement.
    Calibrate(calibrate::CalibrateArgs),
    /// Assess every frame, write annotated frames and reports.
    Run(RunFlags),
    /// Generate a synthetic frame directory, detection stream and ground truth.
    Simulate(simulate::SimulateArgs),
    /// Measure pipeline throughput.
    Bench(run::BenchArgs),
    /// Score a run's assessments against a truth-annotated detection stream.
    Evaluate(evaluate::EvaluateArgs),
}

/// Runs one parsed command. Per-frame problems are reported on `err`.
pub fn execute(
    cli: Cli,
    env_config: Option<PathBuf>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    match cli.command {
        Command::Calibrate(args) => calibrate::cmd_calibrate(&args, out),
        Command::Run(flags) => run::cmd_run(&RunConfig::from_flags(&flags, env_config)?, out, err),
        Command::Simulate(args) => simulate::cmd_simulate(&args, out),
        Command::Bench(args) => run::cmd_bench(&args, env_config, out, err),
        Command::Evaluate(args) => evaluate::cmd_evaluate(&args, out),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return 2;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    let env_config = std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    match execute(cli, env_config, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
