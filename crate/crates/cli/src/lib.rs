//! Command-line front end: configuration documents and run orchestration.

pub mod config;
pub mod error;
pub mod modes;
pub mod schema;

pub use config::{parse_config, Mode};
pub use error::CliError;
pub use modes::{run, Outcome, RunSpec};
