//! Command-line driver for the `hardcore` crate: one subcommand per module and
//! reproducible experiments configured in TOML.

pub mod commands;
pub mod config;
pub mod experiment;

pub use config::{validate_config, ExperimentConfig, ExperimentKind, Violation};
pub use experiment::{run_experiment, Check, ExperimentOutcome};
