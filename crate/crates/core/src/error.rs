use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by the command line to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty mode")]
    EmptyMode,

    #[error("coordinate ({i}, {j}, {k}) outside dims {dims:?}")]
    OutOfRange {
        i: usize,
        j: usize,
        k: usize,
        dims: [usize; 3],
    },

    #[error("duplicate coordinate ({i}, {j}, {k})")]
    DuplicateCoordinate { i: usize, j: usize, k: usize },

    #[error("invalid value {value} at ({i}, {j}, {k}): must be finite and within [0, 1]")]
    InvalidValue {
        i: usize,
        j: usize,
        k: usize,
        value: f64,
    },

    #[error("insufficient class members in layer {layer}: {positives} positive, {negatives} negative (need at least 2 of each)")]
    InsufficientClassMembers {
        layer: usize,
        positives: usize,
        negatives: usize,
    },

    #[error("{0} not SPD")]
    NotSpd(&'static str),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("ambiguous mapping: {efo} maps to both {first} and {second}")]
    AmbiguousMapping {
        efo: String,
        first: String,
        second: String,
    },

    #[error("empty outcome layer")]
    EmptyOutcomeLayer,

    #[error("degenerate labels: need at least one positive and one negative")]
    DegenerateLabels,

    #[error("empty group")]
    EmptyGroup,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0}")]
    Data(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NotSpd(_) | Error::Numerical(_) => ErrorClass::Numerical,
            Error::InvalidArgument(_) => ErrorClass::Usage,
            _ => ErrorClass::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
