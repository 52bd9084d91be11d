use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left_name} has {left} entries but {right_name} has {right}")]
    DimensionMismatch {
        left_name: &'static str,
        left: usize,
        right_name: &'static str,
        right: usize,
    },

    /// Rows and columns are 1-based positions in the source file.
    #[error("non-numeric cell {value:?} in {path} at row {row}, column {column}")]
    NonNumeric {
        path: PathBuf,
        row: usize,
        column: usize,
        value: String,
    },

    #[error("ragged row in {path}: row {row} has {found} cells, expected {expected}")]
    Ragged {
        path: PathBuf,
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("column {column} of the design is identically zero")]
    ZeroColumn { column: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("non-positive value in {what} at index {index}")]
    NonPositive { what: &'static str, index: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("matrix is not numerically positive definite (minimum pivot {min_pivot:e})")]
    NotPositiveDefinite { min_pivot: f64 },

    #[error("non-finite inverse-gamma rate for {what} at index {index}")]
    NonFiniteRate { what: &'static str, index: usize },

    #[error("degenerate data: noise-variance rate is zero")]
    DegenerateData,

    #[error("gibbs sweep {sweep} failed: {source}")]
    Sweep {
        sweep: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("coordinate descent produced a non-finite iterate in pass {pass}")]
    DivergedIterate { pass: usize },

    #[error("replicate {replicate} (sub-seed {sub_seed}) failed: {source}")]
    Replicate {
        replicate: usize,
        sub_seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error("schema mismatch in {path}: {detail}")]
    Schema { path: PathBuf, detail: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    /// Short stable tag used by the command-line error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NonNumeric { .. } => "non_numeric",
            Error::Ragged { .. } => "ragged_row",
            Error::ZeroColumn { .. } => "zero_column",
            Error::Empty(_) => "empty_input",
            Error::NonFinite { .. } => "non_finite",
            Error::NonPositive { .. } => "non_positive",
            Error::Config(_) => "config",
            Error::NotPositiveDefinite { .. } => "not_positive_definite",
            Error::NonFiniteRate { .. } => "non_finite_rate",
            Error::DegenerateData => "degenerate_data",
            Error::Sweep { .. } => "sweep_failure",
            Error::DivergedIterate { .. } => "diverged_iterate",
            Error::Replicate { .. } => "replicate_failure",
            Error::MissingInput(_) => "missing_input",
            Error::Schema { .. } => "schema",
            Error::Io { .. } => "io",
            Error::Csv { .. } => "csv",
        }
    }
}
