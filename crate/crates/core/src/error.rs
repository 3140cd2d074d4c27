use thiserror::Error;

/// Errors raised by model construction, sampling, I/O and reconstruction.
#[derive(Debug, Error)]
pub enum SlideError {
    #[error("dimension too large for exact enumeration: p = {p} (limit {limit})")]
    DimensionTooLarge { p: usize, limit: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("infeasible degree: {0}")]
    DegreeInfeasible(String),

    #[error("no valid graph found after {attempts} attempts: {what}")]
    ConstructionFailed { what: String, attempts: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid coupling matrix: {0}")]
    InvalidCoupling(String),

    #[error("invalid spin value {value} at row {row}, column {col}")]
    InvalidSpin { row: usize, col: usize, value: i64 },

    #[error("ragged input: row {row} has {found} fields, expected {expected}")]
    RaggedRow { row: usize, expected: usize, found: usize },

    #[error("unknown token {token:?} at row {row}, column {col}")]
    UnknownToken { token: String, row: usize, col: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("combinatorial budget exceeded: {count} supports (limit {limit})")]
    BudgetExceeded { count: u128, limit: u128 },

    #[error("sample size cap {max_n} reached without meeting the success threshold")]
    MaxNExceeded { max_n: usize, trace: Vec<crate::eval::complexity::TracePoint> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SlideError>;
