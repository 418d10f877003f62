use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, FouError>;

#[derive(Debug, Error)]
pub enum FouError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Circulant embedding produced an eigenvalue below the clamp tolerance.
    #[error(
        "circulant embedding failed: min eigenvalue {min_eigenvalue:e} vs max {max_eigenvalue:e}"
    )]
    EmbeddingFailure {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("overflow guard: alpha * n = {0} exceeds 40")]
    Overflow(f64),

    /// The path is numerically in the span of the basis, so the estimator is undefined.
    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error("{}:{line}: {message}", file.display())]
    Parse {
        file: PathBuf,
        line: u64,
        message: String,
    },

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FouError {
    /// True for failures caused by the numerics of a path rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            FouError::EmbeddingFailure { .. }
                | FouError::Numerical(_)
                | FouError::Overflow(_)
                | FouError::DegenerateDesign(_)
        )
    }
}
