use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: String,
        expected: usize,
        actual: usize,
    },

    #[error("invalid probability vector or matrix `{name}`: {reason}")]
    Probability { name: String, reason: String },

    #[error("matrix `{name}` is not symmetric positive definite")]
    NotSpd { name: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("classes {m} and {l} are indistinguishable (zero deflection with nonzero priors)")]
    Indistinguishable { m: usize, l: usize },

    #[error("classifier family has no entry for degree profile {0:?}")]
    MissingDegree(Vec<usize>),

    #[error(
        "edge probability clamped for {clamped} of {pairs} node pairs (limit 0.1%); \
         use smaller expected degrees or more nodes"
    )]
    ClampOverflow { clamped: u64, pairs: u64 },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{0}")]
    Graph(String),

    #[error("config: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn dim(context: impl Into<String>, expected: usize, actual: usize) -> Self {
        Error::Dimension {
            context: context.into(),
            expected,
            actual,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
