use std::path::PathBuf;

use thiserror::Error;

/// Failures while loading or reshaping tabular data.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DataError {
    #[error("{path}: empty file")]
    Empty { path: String },
    #[error("row {row}, column {column}: cannot parse {value:?} as a number")]
    Parse { row: usize, column: usize, value: String },
    #[error("row {row}: expected {expected} fields, found {found}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("label column {0:?} not found")]
    MissingLabelColumn(String),
    #[error("dataset has a single class; at least two are required")]
    SingleClass,
    #[error("non-finite feature value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("class {class} has {count} members, fewer than the {folds} folds requested")]
    Stratification { class: usize, count: usize, folds: usize },
    #[error("{0}")]
    Invalid(String),
    #[error("csv: {0}")]
    Csv(String),
}

/// Failures inside the dense linear-algebra kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("non-finite input")]
    NonFinite,
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("right-hand pencil matrix has zero trace")]
    ZeroTrace,
    #[error("singular system")]
    Singular,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("eigensolver did not produce a finite result")]
    NoConvergence,
}

/// Crate-level error.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("dataset {path}: {source}")]
    Dataset {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Process exit code for the CLI: 1 usage/config, 2 data, 3 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Data(_) | Error::Io { .. } | Error::Format { .. } => 2,
            Error::Numeric(_) => 3,
            Error::Dataset { source, .. } => source.exit_code(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
