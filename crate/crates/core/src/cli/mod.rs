//! Command-line front end: `run`, `compare`, `plan`, `rates` and `verify`.
//!
//! Exit codes: 0 on success, 1 when verification or a solver fails
//! numerically, 2 for usage errors (bad flags, unreadable input, invalid
//! configuration).

mod commands;
mod output;
mod problem;
mod settings;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::Error;

pub use output::Columns;
pub use problem::ProblemArgs;
pub use settings::{InnerLength, List, Settings, THREADS_ENV};

pub use commands::{CompareArgs, PlanArgs, RatesArgs, RunArgs, VerifyArgs};

#[derive(Debug, Parser)]
#[command(
    name = "ps2gd",
    version,
    about = "Projected semi-stochastic gradient descent with mini-batches"
)]
pub struct Cli {
    /// key=value settings file (keys are long flag names; flags take precedence).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one solver and write its trace as CSV.
    Run(RunArgs),
    /// Run PS2GD (b = 1 and b = 4), SGD, SGD+ and FISTA against one reference.
    Compare(CompareArgs),
    /// Plan stepsize and inner-loop length per mini-batch size for a target rate.
    Plan(PlanArgs),
    /// Evaluate the per-epoch contraction factors.
    Rates(RatesArgs),
    /// Run the property suites.
    Verify(VerifyArgs),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Exit code for an error escaping a command.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Numeric { .. } | Error::Convergence { .. } | Error::Estimation(_) => EXIT_FAILURE,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(cli: &Cli) -> crate::error::Result<i32> {
    let settings = Settings::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Run(a) => commands::cmd_run(a, &settings),
        Command::Compare(a) => commands::cmd_compare(a, &settings),
        Command::Plan(a) => commands::cmd_plan(a, &settings),
        Command::Rates(a) => commands::cmd_rates(a, &settings),
        Command::Verify(a) => commands::cmd_verify(a, &settings),
    }
}
