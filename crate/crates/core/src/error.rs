use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("corpus {0} contains no records")]
    EmptyCorpus(PathBuf),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("noise pool too small: {required} messages required, {available} available")]
    PoolTooSmall { required: usize, available: usize },

    #[error("need at least {required} minority samples for interpolation, found {found}")]
    TooFewMinority { required: usize, found: usize },

    #[error("training data contains a single class")]
    SingleClass,

    #[error("dimension mismatch: model expects {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Fleiss' kappa is undefined: every rating falls in one category")]
    UndefinedKappa,

    #[error("ICC is undefined: ratings have zero total variance")]
    UndefinedIcc,

    #[error("incompatible model artifact: {0}")]
    Incompatible(String),

    #[error("cell (dims={dims}, noise={noise}): {source}")]
    Cell {
        dims: usize,
        noise: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the error stems from bad input or configuration rather than
    /// a runtime failure. Drives the CLI exit code.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Io { .. } | Error::Json(_) => false,
            Error::Cell { source, .. } => source.is_validation(),
            _ => true,
        }
    }
}
