use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] prsant_core::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },

    /// Some sweep entries failed; their errors are in the summary.
    #[error("{failed} of {total} sweep entries failed")]
    Partial { failed: usize, total: usize, code: u8 },
}

impl CliError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn csv(path: &Path, source: csv::Error) -> Self {
        CliError::Csv {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 1 validation, 2 numerical, 3 I/O.
    pub fn exit_code(&self) -> u8 {
        use prsant_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Invalid(_) => 1,
            CliError::Core(E::InvalidParameter { .. } | E::NonFinite(_) | E::Geometry { .. }) => 1,
            CliError::Core(E::Fit(_) | E::Unstable { .. } | E::Spectrum(_)) => 2,
            CliError::Io { .. } => 3,
            CliError::Csv { source, .. } => {
                if source.is_io_error() {
                    3
                } else {
                    1
                }
            }
            CliError::Partial { code, .. } => *code,
        }
    }
}
