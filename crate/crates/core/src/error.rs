use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("qubit {qubit} out of range for a {width}-qubit register")]
    QubitOutOfRange { qubit: usize, width: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("register too wide: {width} qubits exceeds the limit of {limit}")]
    TooWide { width: usize, limit: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("encoding error: {0}")]
    Encoding(String),
    #[error("invalid ansatz: {0}")]
    InvalidAnsatz(String),
    #[error("gate {0} cannot be differentiated with a shift rule")]
    NotShiftable(String),
    #[error("training diverged at epoch {epoch}: loss is {loss}")]
    Diverged { epoch: usize, loss: f64 },
    #[error("mutation scope is empty")]
    EmptyScope,
    #[error("operator {operator} is inapplicable: {reason}")]
    Inapplicable { operator: String, reason: String },
    #[error("diff replay failed: {0}")]
    Replay(String),
    #[error("statistics error: {0}")]
    Stats(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
