use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: line {line}, column {column}: {msg}", path.display())]
    Parse { path: PathBuf, line: usize, column: usize, msg: String },

    #[error("{}: measure {index}: {source}", path.display())]
    InvalidMeasure { path: PathBuf, index: usize, source: wlab_core::Error },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] wlab_core::Error),

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("config: {0}")]
    Config(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}

pub(crate) fn parse_err(path: impl Into<PathBuf>) -> impl FnOnce(serde_json::Error) -> CliError {
    let path = path.into();
    move |e| CliError::Parse { path, line: e.line(), column: e.column(), msg: e.to_string() }
}
