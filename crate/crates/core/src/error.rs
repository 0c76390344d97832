use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures raised by the state kernel and the protocols built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("axis is not unit norm (squared norm {norm_sq})")]
    NonUnitAxis { norm_sq: f64 },

    #[error("state is not normalized (squared norm {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("amplitude vector has non-finite entries")]
    NonFinite,

    #[error("unsupported amplitude count {0}; expected 2, 4 or 8")]
    BadLength(usize),

    #[error("register of {0} qubits exceeds the 3-qubit capacity")]
    Capacity(usize),

    #[error("gate is not unitary (max deviation from identity {0:e})")]
    NotUnitary(f64),

    #[error("dimension mismatch: {left} vs {right}")]
    Dimension { left: usize, right: usize },

    #[error("qubit index {index} out of range for a {num_qubits}-qubit state")]
    Index { index: usize, num_qubits: usize },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("state norm is degenerate ({0:e})")]
    Degenerate(f64),

    #[error("invalid parameter `{field}`: {reason}")]
    Validation { field: &'static str, reason: String },
}

impl Error {
    pub(crate) fn validation(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field,
            reason: reason.into(),
        }
    }
}
