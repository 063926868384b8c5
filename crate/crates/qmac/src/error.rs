use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension cap exceeded: {got} (cap {cap})")]
    DimensionCap { got: usize, cap: usize },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("subsystem factorization error: {0}")]
    FactorError(String),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid probability vector: {0}")]
    BadDistribution(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("label error: {0}")]
    LabelError(String),

    #[error("letter {letter} outside alphabet of size {alphabet_size}")]
    AlphabetError { letter: usize, alphabet_size: usize },

    #[error("block-Pauli index out of range: {0}")]
    IndexError(String),

    #[error("degenerate decoder: {0}")]
    DegenerateDecoder(String),

    #[error("invalid operands: {0}")]
    BadOperands(String),

    #[error("channel is not generalized dephasing: {0}")]
    NotDephasing(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
