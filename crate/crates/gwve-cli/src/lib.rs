//! Command-line front end for the [`gwve`] crate.
//!
//! The binary (`gwve`) loads environment descriptions from JSON files and
//! drives batch computations: criticality ledgers, exact laws of `Z_n` and
//! of the conditional population `Y_n`, rate-bound shapes, exact Wasserstein
//! distances to the standard exponential, Monte Carlo estimators on the
//! one-spine size-biased tree, and a one-shot reproduction of four worked
//! example environments.  Output is data only — CSV or JSON with fixed
//! schemas — so downstream plotting and analysis stay scriptable.
//!
//! Exit codes are part of the contract:
//!
//! | code | meaning                                        |
//! |------|------------------------------------------------|
//! | 0    | success                                        |
//! | 2    | input or validation error (flags, env file)    |
//! | 3    | numerical failure (typically truncation)       |
//! | 4    | simulation budget exhausted (cap / rejections)  |
//!
//! Every command is deterministic given its flags (and seed); repeated runs
//! produce byte-identical artifacts.

use std::fmt;

use gwve::bounds::BoundsError;
use gwve::env::EnvError;
use gwve::exact::ExactError;
use gwve::spine::SpineError;
use gwve::wasserstein::WassersteinError;

pub mod cli;
pub mod commands;
pub mod envfile;
pub mod exactlaw;
pub mod examples;
pub mod output;

pub use cli::{Cli, Command, Estimator, Format};

/// A command failure carrying its scriptable exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Bad input: flags, environment file, schema, or precondition (exit 2).
    Validation(String),
    /// Numerical failure, chiefly truncation (exit 3).
    Numerical(String),
    /// A simulation resource budget was exhausted (exit 4).
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Budget(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) | CliError::Budget(m) => {
                f.write_str(m)
            }
        }
    }
}

impl std::error::Error for CliError {}

/// Shorthand for input/validation failures.
pub fn validation(msg: impl fmt::Display) -> CliError {
    CliError::Validation(msg.to_string())
}

/// Maps environment construction/evaluation failures (always bad input).
pub fn map_env(e: EnvError) -> CliError {
    CliError::Validation(format!("environment: {e}"))
}

/// Maps exact-engine failures; `k` is the truncation point in effect so a
/// truncation failure can suggest a workable retry.
pub fn map_exact(e: ExactError, k: usize) -> CliError {
    match e {
        ExactError::Env(e) => map_env(e),
        ExactError::InvalidK { k } => {
            CliError::Validation(format!("--trunc {k} must be a power of two"))
        }
        ExactError::Truncation { tail_mass, tol } => CliError::Numerical(format!(
            "tail mass {tail_mass:e} exceeds tolerance {tol:e} at --trunc {k}; \
             retry with --trunc {} or larger",
            k.saturating_mul(2)
        )),
        other => CliError::Numerical(other.to_string()),
    }
}

/// Maps rate-bound failures: domain problems are numerical, the rest input.
pub fn map_bounds(e: BoundsError) -> CliError {
    match e {
        BoundsError::Env(e) => map_env(e),
        BoundsError::FamilyMismatch { .. } => CliError::Validation(e_to_string(&e)),
        other => CliError::Numerical(e_to_string(&other)),
    }
}

/// Maps distance-computation failures.
pub fn map_wasserstein(e: WassersteinError, k: usize) -> CliError {
    match e {
        WassersteinError::TailTooHeavy { tail_mass } => CliError::Numerical(format!(
            "conditional tail mass {tail_mass:e} is too heavy for a faithful distance at \
             --trunc {k}; retry with --trunc {} or larger",
            k.saturating_mul(2)
        )),
        WassersteinError::EmptySample { .. } => CliError::Validation(e_to_string(&e)),
    }
}

/// Maps simulation failures: population caps are budget failures, nested
/// exact/environment errors keep their own classes.
pub fn map_spine(e: SpineError) -> CliError {
    match e {
        SpineError::Env(e) => map_env(e),
        SpineError::Exact(ExactError::Env(e)) => map_env(e),
        SpineError::Exact(e) => CliError::Numerical(format!("exact comparison law: {e}")),
        SpineError::Cap { generation, cap } => CliError::Budget(format!(
            "population exceeded the cap {cap} at generation {generation}; \
             the environment grows too fast to simulate at this horizon"
        )),
        SpineError::ZeroMean => {
            CliError::Validation("size-biasing requires a positive-mean offspring law".into())
        }
    }
}

fn e_to_string(e: &impl fmt::Display) -> String {
    e.to_string()
}

/// Maps IO failures on a named path (bad input: unreadable/unwritable file).
pub fn map_io(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Validation(format!("{}: {e}", path.display()))
}

/// Executes one parsed command line.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Classify(args) => commands::classify::run(args),
        Command::Exact(args) => commands::exact::run(args),
        Command::Bounds(args) => commands::bounds::run(args),
        Command::Wasserstein(args) => commands::wasserstein::run(args),
        Command::Simulate(args) => commands::simulate::run(args),
        Command::ReproduceExamples(args) => commands::reproduce::run(args),
    }
}
