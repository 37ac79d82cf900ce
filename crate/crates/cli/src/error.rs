use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("numerical diagnostic failed: {0}")]
    Diagnostic(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] qdyn_core::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 0 success, 2 config/input error, 3 numerical diagnostic, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Diagnostic(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Core(e) => match e {
                qdyn_core::Error::Eigendecomposition | qdyn_core::Error::NotUnitary(_) => 3,
                _ => 2,
            },
        }
    }
}
