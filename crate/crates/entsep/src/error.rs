use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not Hermitian: max |M - M\u{2020}| = {deviation:.3e} > {tolerance:.3e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("invalid unextendible product basis: {0}")]
    InvalidUpb(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("input error: {0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 input error, 3 domain precondition
    /// error, 4 internal numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DimensionMismatch(_)
            | Error::NotHermitian { .. }
            | Error::InvalidState(_)
            | Error::ParameterOutOfRange(_)
            | Error::InvalidUpb(_)
            | Error::Input(_)
            | Error::Io(_)
            | Error::Json(_) => 2,
            Error::Precondition(_) => 3,
            Error::Numerical(_) => 4,
        }
    }
}
