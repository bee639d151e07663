use thiserror::Error;

pub type Result<T> = std::result::Result<T, DepthError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DepthError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("empty observation set")]
    Empty,

    #[error("invalid dimension p = {0} (need p >= 2)")]
    InvalidDimension(usize),

    #[error("scale factor must be non-zero")]
    ZeroScale,

    #[error("transform matrix is singular")]
    SingularTransform,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for DepthError {
    fn from(e: std::io::Error) -> Self {
        DepthError::Io(e.to_string())
    }
}
