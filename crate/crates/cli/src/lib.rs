//! Command-line front end for portfolio bandit backtests.
//!
//! [`manifest`] turns a key-value file plus flags into a [`RunManifest`];
//! [`commands`] runs backtests, sweeps and data checks and writes their
//! CSV and JSON outputs.

pub mod commands;
pub mod error;
pub mod manifest;

pub use commands::{cmd_run, cmd_sweep, cmd_validate, load_panel, ValidationReport};
pub use error::{CliError, Result};
pub use manifest::{DataFormat, RunManifest, Settings};
