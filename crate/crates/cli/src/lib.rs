//! Batch front end for `selfsim-core`: run configurations in, CSV out.
//!
//! A configuration is a flat list of `[section]` blocks with `key = value`
//! lines; see [`config::parse_config`]. [`run::run`] dispatches it and
//! returns the CSV text, which depends only on the configuration.

pub mod config;
pub mod run;

pub use config::{parse_config, Command, ConfigError, ConfigErrors, RunConfig};
pub use run::{ml_table, run, validate_kernel, Output, RunError};
