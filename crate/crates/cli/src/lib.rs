//! Command-line harness: topology generation, scripted traces, Monte Carlo
//! campaigns and bound tables.

pub mod commands;
pub mod config;

pub use commands::CliError;
pub use config::{CampaignConfig, ConfigError, Mode};
