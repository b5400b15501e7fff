use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension of polynomial space overflows for n={nvars}, d={degree}")]
    Overflow { nvars: usize, degree: usize },

    #[error("{what}: expected {expected}, found {found}")]
    DimensionMismatch { what: &'static str, expected: usize, found: usize },

    #[error("leading block of level {level} is singular or ill-conditioned (condition estimate {condition:.3e})")]
    NestedUnisolvenceFailure { level: usize, condition: f64 },

    #[error("function has a pole at {locus}")]
    Pole { locus: String },

    #[error("duplicate interpolation node at position {index}")]
    DuplicateNode { index: usize },

    #[error("Gram matrix is numerically singular at basis index {index}")]
    SingularGram { index: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
