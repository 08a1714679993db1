use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("checkpoint {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },
    #[error(transparent)]
    Numeric(#[from] motionpulse_core::Error),
    #[error("{0}")]
    NumericCheck(String),
}

impl CliError {
    /// 1 for anything the user can fix on the command line or in a file,
    /// 2 when the numerics themselves failed.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(_) | CliError::NumericCheck(_) => 2,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}
