use thiserror::Error;

pub type Result<T, E = PlankError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlankError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("cannot normalize a zero vector")]
    ZeroVector,

    /// `|<v_k, v>|` fell to or below the factor floor; the caller should jitter.
    #[error("factor {index} is numerically zero (|<v_k, v>| <= floor)")]
    NearZeroFactor { index: usize },

    #[error("denominator <u, v_{index}> vanishes")]
    ZeroDenominator { index: usize },

    #[error("operation requires dimension {expected}, instance has d = {found}")]
    WrongDimension { expected: usize, found: usize },

    #[error("operation requires equal weights t_k = 1/sqrt(n)")]
    UnequalWeights,

    #[error("plank index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl PlankError {
    pub(crate) fn parse_at(err: &serde_json::Error, context: &str) -> Self {
        PlankError::Parse {
            line: err.line(),
            column: err.column(),
            message: format!("{context}: {err}"),
        }
    }

    pub(crate) fn field(field: &str, message: impl std::fmt::Display) -> Self {
        PlankError::Parse {
            line: 0,
            column: 0,
            message: format!("field `{field}`: {message}"),
        }
    }
}
