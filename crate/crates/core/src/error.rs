use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("symbol {symbol} out of range for alphabet of size {size}")]
    SymbolOutOfRange { symbol: usize, size: usize },

    #[error("Blahut-Arimoto did not reach tolerance {tol:e} within {iterations} iterations (gap {gap:e})")]
    NoConvergence { tol: f64, iterations: usize, gap: f64 },

    #[error("binary-input channel required, got |X| = {0}")]
    NotBinary(usize),

    #[error("L-density is not symmetric within {0:e}")]
    AsymmetricDensity(f64),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("block length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown {kind} `{name}`")]
    Unregistered { kind: &'static str, name: String },

    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
