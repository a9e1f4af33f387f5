use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid factor subset {indices:?} for {factors} tensor factors")]
    InvalidSubset { indices: Vec<usize>, factors: usize },

    #[error("matrix is not Hermitian (relative deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("problem size {size} exceeds the configured cap of {cap}")]
    SizeCap { size: usize, cap: usize },

    #[error("block `{block}` has no trace cap; refusing to produce an unsound certificate")]
    MissingTraceCap { block: String },

    #[error("invalid conic program: {0}")]
    Program(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("symbolic ensemble `{0}` has no finite item list")]
    Symbolic(String),
}

pub type Result<T> = std::result::Result<T, Error>;
