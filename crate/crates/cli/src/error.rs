use std::path::PathBuf;

use sac_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("data: {0}")]
    Data(String),
    #[error("network file {path}: {msg}")]
    Model { path: String, msg: String },
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    /// Process exit status: 2 usage, 3 config, 4 input files and data,
    /// 5 network documents, 6 invalid parameters, 7 numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::Io { .. } | CliError::Data(_) | CliError::Core(CoreError::Data(_)) => 4,
            CliError::Model { .. } => 5,
            CliError::Core(CoreError::InvalidParameter(_)) => 6,
            CliError::Core(_) => 7,
        }
    }
}
