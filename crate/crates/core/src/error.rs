use thiserror::Error;

/// Errors raised by the numerical routines and the experiment harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix must have at least as many rows as columns, got {rows}x{cols}")]
    TooFewRows { rows: usize, cols: usize },

    #[error("invalid matrix shape {rows}x{cols} for {len} entries")]
    InvalidShape {
        rows: usize,
        cols: usize,
        len: usize,
    },

    #[error("matrix is singular to working precision ({detail})")]
    Singular { detail: String },

    #[error("jacobi svd did not converge after {sweeps} sweeps (residual {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("row {row} is zero; its hyperplane is undefined")]
    ZeroRow { row: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("degenerate point cloud: {0}")]
    DegenerateCloud(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Errors caused by bad user input rather than numerical failure.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Parse { .. } | Error::Io(_) | Error::InvalidShape { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
