//! Experiment runner behind the `sharpeig` binary.
//!
//! A run is described by an [`ExperimentConfig`], read from JSON with field
//! overrides, and produces a [`RunReport`] plus CSV/JSON files in an output
//! directory.

pub mod commands;
pub mod config;
pub mod error;
pub mod expr;
pub mod output;
pub mod report;

pub use commands::{run, DEFAULT_OUT_DIR};
pub use config::ExperimentConfig;
pub use error::{CliError, Result};
pub use output::emit_plotdata;
pub use report::{RunReport, Verdict};

/// Environment variable naming the output directory.
pub const OUT_DIR_ENV: &str = "SHARPEIG_OUT_DIR";
