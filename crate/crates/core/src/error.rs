use thiserror::Error;

/// Error type shared by all modules.
#[derive(Debug, Error)]
pub enum EdgeflowError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("quadrature error: {message}; recommended refinement: {recommendation}")]
    Quadrature {
        message: String,
        recommendation: String,
    },
    #[error("basis error: {0}")]
    Basis(String),
    #[error("state error: {0}")]
    State(String),
    #[error("linear algebra error at node {node}: {message}")]
    LinearAlgebra { node: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, EdgeflowError>;
