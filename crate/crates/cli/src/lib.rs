//! Experiment runner for the `ergolab-core` semigroup laboratory.

pub mod commands;
pub mod config;
pub mod error;
pub mod suite;

pub use commands::{cmd_cesaro, cmd_matrix, cmd_simulate, cmd_verify};
pub use config::ExperimentConfig;
pub use error::{CliError, Result};
