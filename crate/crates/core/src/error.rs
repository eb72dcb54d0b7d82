use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit state")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("qubit {0} listed more than once")]
    DuplicateQubit(usize),

    #[error("qubit {0} is both target and control")]
    OverlappingQubits(usize),

    #[error("state sizes differ: {left} vs {right} qubits")]
    SizeMismatch { left: usize, right: usize },

    #[error("{what} index {index} out of range (limit {limit})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("hyperplane has a zero weight vector")]
    ZeroWeight,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("rejection sampling gave up after {attempts} draws")]
    RetryBudgetExhausted { attempts: usize },

    #[error("layout has no scratch qubit")]
    MissingScratch,

    #[error("scratch qubit left entangled (weight {weight:e} on |1>)")]
    ScratchEntangled { weight: f64 },

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}
