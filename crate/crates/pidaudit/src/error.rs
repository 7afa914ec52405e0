//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("empty dataset")]
    EmptyDataset,

    #[error("row {row}: unknown symbol {symbol:?} in column {column:?}")]
    UnknownSymbol {
        row: usize,
        column: String,
        symbol: String,
    },

    #[error("unknown variable {0:?}")]
    UnknownVariable(String),

    #[error("column {0:?} missing from input")]
    MissingColumn(String),

    #[error("row {row}, column {column:?}: {message}")]
    BadCell {
        row: usize,
        column: String,
        message: String,
    },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("joint alphabet too large: {cells} cells exceeds cap {cap}; group or bin features to shrink it")]
    JointTooLarge { cells: usize, cap: usize },

    #[error("too many features: {n} exceeds the subset-enumeration cap of {cap}")]
    TooManyFeatures { n: usize, cap: usize },

    #[error("solver quality: {0}")]
    SolverQuality(String),

    #[error("missing subset entry {{{0}}}")]
    MissingSubset(String),

    #[error("oracle error on rows {row_start}..{row_end}: {message}")]
    OracleBatch {
        row_start: usize,
        row_end: usize,
        message: String,
    },

    #[error("oracle error: {0}")]
    Oracle(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, AuditError>;
