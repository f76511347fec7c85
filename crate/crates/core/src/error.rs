use thiserror::Error;

/// Errors raised by the library. `exit_code` maps them onto the CLI contract.
#[derive(Debug, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("element not reached within search radius {radius}")]
    RadiusExceeded { radius: usize },
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("flavor error: expected {expected}, got {got}")]
    Flavor { expected: String, got: String },
    #[error("permutation cap exceeded: degree {degree} > {cap}")]
    PermutationCap { degree: usize, cap: usize },
    #[error("unsupported order: {0}")]
    UnsupportedOrder(String),
    #[error("no conjugating witness stored for class member {0}")]
    WitnessNotFound(String),
    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("operator is not invertible: gap {gap:e}")]
    Gap { gap: f64 },
    #[error("operator is not Hermitian (defect {0:e})")]
    NonHermitian(f64),
    #[error("element is not idempotent (defect {0:e})")]
    NonIdempotent(f64),
    #[error("quadrature did not converge: {0}")]
    Convergence(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("{path}: {message}")]
    Validation { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation { path: path.into(), message: message.into() }
    }

    /// 2 for bad input, 3 for failed computations.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation { .. }
            | Error::Structural(_)
            | Error::Flavor { .. }
            | Error::DegreeMismatch { .. }
            | Error::NonHermitian(_)
            | Error::NonIdempotent(_)
            | Error::Io(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
