//! Command-line front end and local HTTP service for `cogen`.

pub mod commands;
pub mod config;
pub mod service;

pub use commands::CliError;
pub use config::{ConfigLayer, RunConfig};
