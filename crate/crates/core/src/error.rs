use thiserror::Error;

/// Errors shared across the simulation, decomposition and scheduling layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not unitary (max deviation {deviation:.3e}): {context}")]
    NotUnitary { context: String, deviation: f64 },

    #[error("invalid form: {0}")]
    InvalidForm(String),

    #[error("convention check failed in {stage}: {detail}")]
    ConventionFailure { stage: String, detail: String },

    #[error("expansion is not of the fast form: {0}")]
    NotFastForm(String),

    #[error("{0} requires a prime qudit dimension, got {1}")]
    NonPrime(String, usize),

    #[error("unknown protocol variant: {0}")]
    UnknownVariant(String),

    #[error("variant {variant} takes {expected} repeater position(s), got {got}")]
    ArityMismatch {
        variant: String,
        expected: usize,
        got: usize,
    },

    #[error("invalid topology: {0}")]
    Topology(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
