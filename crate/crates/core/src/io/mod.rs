//! Configuration parsing, result files and the command implementations.

pub mod commands;
pub mod config;
pub mod output;

pub use config::{experiment_to_toml, ConfigFile};
pub use output::{Format, KeyValues, RunManifest};
