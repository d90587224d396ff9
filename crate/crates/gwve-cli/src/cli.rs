//! Flag parsing: one subcommand per operation, shared flag vocabulary.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "gwve",
    version,
    about = "Exact laws, rate bounds and reproducible Monte Carlo for critical \
             Galton-Watson processes in varying environments",
    propagate_version = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the moment ledger μ_n, ρ_{0,n} and report finite-horizon
    /// criticality evidence.
    Classify(ClassifyArgs),
    /// Exact law of Z_n, the conditional law Y_n, its mean b_n, and the
    /// survival probability at one generation.
    Exact(ExactArgs),
    /// Batch rate quantities r_n, s_n and every bound shape over n = 2..N.
    Bounds(BoundsArgs),
    /// Exact Wasserstein distance of Y_n/b_n to Exp(1) for n = 1..N.
    Wasserstein(WassersteinArgs),
    /// Monte Carlo estimators on the one-spine size-biased tree.
    Simulate(SimulateArgs),
    /// Reproduce the four built-in worked examples into a directory of CSVs.
    ReproduceExamples(ReproduceArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Estimator {
    /// Histogram and mean of the size-biased population Ż_n.
    SpineLaw,
    /// Kolmogorov-Smirnov gap of R_n − U against the exact equilibrium CDF.
    Equilibrium,
    /// Monte Carlo distance bound (2/b_n)(E[U] + Σ_j E[R̃+R; A^c]).
    Meanyye,
    /// The four per-generation inequalities behind the distance bound.
    Steps,
}

impl Estimator {
    /// Stable artifact stem (also the JSON `estimator` field).
    pub fn slug(self) -> &'static str {
        match self {
            Estimator::SpineLaw => "spine-law",
            Estimator::Equilibrium => "equilibrium",
            Estimator::Meanyye => "meanyye",
            Estimator::Steps => "steps",
        }
    }
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    /// Environment description file (JSON).
    #[arg(long, value_name = "PATH")]
    pub env: PathBuf,
    /// Horizon N; defaults to the environment file's `horizon`.
    #[arg(long = "n-max", value_name = "N")]
    pub n_max: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Trend slack ε for the unboundedness heuristics (default 0.05).
    #[arg(long, value_name = "X")]
    pub tol: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ExactArgs {
    /// Environment description file (JSON).
    #[arg(long, value_name = "PATH")]
    pub env: PathBuf,
    /// Generation to compute at.
    #[arg(long, value_name = "N")]
    pub n: u64,
    /// Truncation point K (a power of two); the law is reported on 0..K.
    #[arg(long, value_name = "K", default_value_t = 1024)]
    pub trunc: usize,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Tail-mass tolerance for the law of Z_n (default 1e-8).
    #[arg(long, value_name = "X")]
    pub tol: Option<f64>,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    /// Environment description file (JSON).
    #[arg(long, value_name = "PATH")]
    pub env: PathBuf,
    /// Largest generation N; rows cover n = 2..=N.
    #[arg(long = "n-max", value_name = "N")]
    pub n_max: u64,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct WassersteinArgs {
    /// Environment description file (JSON).
    #[arg(long, value_name = "PATH")]
    pub env: PathBuf,
    /// Largest generation N; rows cover n = 1..=N.
    #[arg(long = "n-max", value_name = "N")]
    pub n_max: u64,
    /// Truncation point K (a power of two) for the conditional law.
    #[arg(long, value_name = "K", default_value_t = 4096)]
    pub trunc: usize,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Tail-mass tolerance for the law of Z_n (default 1e-8).
    #[arg(long, value_name = "X")]
    pub tol: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Environment description file (JSON).
    #[arg(long, value_name = "PATH")]
    pub env: PathBuf,
    /// Horizon to simulate to.
    #[arg(long, value_name = "N")]
    pub n: u64,
    /// Which estimator to run.
    #[arg(long, value_enum)]
    pub estimator: Estimator,
    /// Monte Carlo sample count M.
    #[arg(long, value_name = "M", default_value_t = 100_000)]
    pub samples: usize,
    /// RNG seed; identical (flags, seed) runs are byte-identical.
    #[arg(long, value_name = "S", default_value_t = 0)]
    pub seed: u64,
    /// Output directory for the JSON report and CSV companions; when
    /// omitted the JSON goes to stdout and no CSV is written.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    /// Output directory for the per-example CSVs.
    #[arg(long, value_name = "PATH", default_value = "reproduction")]
    pub out: PathBuf,
    /// Cap each example's generation grid at N (full grids when omitted;
    /// the full run takes a couple of minutes).
    #[arg(long = "n-max", value_name = "N")]
    pub n_max: Option<u64>,
}
