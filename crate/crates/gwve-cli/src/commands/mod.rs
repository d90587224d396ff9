//! One module per subcommand; each exposes `run(&Args) -> Result<(), CliError>`.

pub mod bounds;
pub mod classify;
pub mod exact;
pub mod reproduce;
pub mod simulate;
pub mod wasserstein;
