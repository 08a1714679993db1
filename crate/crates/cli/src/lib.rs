//! Command-line front end: configuration files, checkpoints, report formats
//! and the subcommands built on `motionpulse-core`.

pub mod app;
pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod error;
pub mod parallel;
pub mod provenance;

pub use error::{CliError, Result};
