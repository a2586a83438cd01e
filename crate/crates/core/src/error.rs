use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("no convergence after {iterations} iterations in {what}")]
    NoConvergence { what: &'static str, iterations: usize },
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
