//! Scenario runner, report writer and acceptance suite on top of `wlab-core`.

pub mod acceptance;
pub mod config;
pub mod error;
pub mod load;
pub mod report;
pub mod scenarios;

pub use error::{CliError, CliResult};
