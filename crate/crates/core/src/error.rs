use thiserror::Error;

/// Errors raised by the library. Every numerical failure carries the data
/// needed to diagnose it (offending singular value, residual trace, spectrum).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid local dimension q = {0} (need q >= 2)")]
    InvalidDimension(usize),

    #[error("leg {leg} out of range 1..={z}")]
    LegOutOfRange { leg: usize, z: usize },

    #[error("invalid direction {from}->{to}: legs must differ")]
    InvalidDirection { from: usize, to: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degenerate polar decomposition: smallest singular value {0:e}")]
    DegeneratePolar(f64),

    #[error("generation diverged after {iterations} iterations (last residual {residual:e})")]
    Diverged {
        iterations: usize,
        residual: f64,
        trace: Vec<f64>,
    },

    #[error("ambiguous Jacobian rank: gap ratio {ratio:.3} at cut {cut} is below 10")]
    AmbiguousRank {
        ratio: f64,
        cut: usize,
        spectrum: Vec<f64>,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("dense region needs dimension {needed}, cap allows {cap}")]
    CapExceeded { needed: usize, cap: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
