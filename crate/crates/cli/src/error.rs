use std::path::{Path, PathBuf};

use spa_core::SpaError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } | CliError::Input(_) => 4,
        }
    }
}

impl From<SpaError> for CliError {
    fn from(e: SpaError) -> Self {
        match e {
            SpaError::Io { path, source } => CliError::Io { path, source },
            SpaError::Parse { .. } | SpaError::Missing(_) => CliError::Input(e.to_string()),
            SpaError::DegenerateWeights { .. } | SpaError::Quadrature(_) => CliError::Numerical(e.to_string()),
            SpaError::InvalidParameter(_)
            | SpaError::DimensionMismatch { .. }
            | SpaError::IndexOutOfRange { .. }
            | SpaError::ConstantColumn(_) => CliError::Usage(e.to_string()),
        }
    }
}
