use std::io;
use std::path::PathBuf;

/// Failure of a CLI command, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Validation(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    /// 1 for IO failures, 2 for invalid input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Validation(_) => 2,
        }
    }
}

impl From<comi_core::Error> for CliError {
    fn from(e: comi_core::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}
