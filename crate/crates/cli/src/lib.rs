//! Pipelines behind the `rdnet` command: structural analysis, simulation
//! with diagnostics, equilibria, the exponent ladder and run reports.

mod commands;
mod config;
mod error;

pub use commands::{
    analyze_file, cmd_analyze, cmd_equilibrium, cmd_ladder, cmd_report, cmd_simulate, configure_threads,
    format_vector, simulate, AnalyzeArgs, EquilibriumArgs, SimOutcome, EXIT_ERROR, EXIT_NOT_VERIFIED, EXIT_OK,
};
pub use config::{hash_bytes, RunConfig};
pub use error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
