use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{origin}:{line}: {message}")]
    Parse {
        origin: String,
        line: usize,
        message: String,
    },

    #[error("{origin}:{line}: unknown {kind} `{name}`")]
    UnknownSymbol {
        origin: String,
        line: usize,
        kind: &'static str,
        name: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("vocabulary mismatch: {0}")]
    VocabMismatch(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("training aborted: {0}")]
    Training(String),

    #[error("checkpoint directory {} is locked by another run", .0.display())]
    Locked(PathBuf),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the failure category.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Io { .. } => 3,
            Error::Parse { .. } | Error::UnknownSymbol { .. } => 4,
            Error::VocabMismatch(_) | Error::Checkpoint(_) => 5,
            Error::Training(_) => 6,
            Error::Locked(_) => 7,
        }
    }
}
