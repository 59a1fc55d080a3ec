use std::io;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{}:{line}: {reason}", path.display())]
    Parse { path: PathBuf, line: u64, reason: String },

    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },

    #[error("{}: {source}", path.display())]
    Trace {
        path: PathBuf,
        source: scalechain_core::Error,
    },

    #[error(transparent)]
    Model(#[from] scalechain_core::Error),

    #[error("config mismatch: {0}")]
    ConfigMismatch(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for numerical or model failures, 1 for bad input.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Model(scalechain_core::Error::NonErgodic { .. })
            | Error::Model(scalechain_core::Error::Numerical(_)) => 2,
            _ => 1,
        }
    }
}
