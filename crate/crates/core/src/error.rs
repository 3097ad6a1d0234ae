use thiserror::Error;

/// Errors raised by the simulator and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian: deviation {deviation:.3e} at entry ({row}, {col})")]
    NotHermitian {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("matrix is not unitary: U^dagger U deviates from identity by {deviation:.3e} at entry ({row}, {col})")]
    NotUnitary {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("no pure fraction: estimation impossible with alpha = 0")]
    NoPureFraction,

    #[error("no signal: both count rates are zero")]
    NoSignal,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("reconstruction failed: {0}")]
    Reconstruction(String),

    #[error("malformed circuit{}: {reason}", match .index { Some(i) => format!(" at gate {i}"), None => String::new() })]
    MalformedCircuit {
        index: Option<usize>,
        reason: String,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable, machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NotHermitian { .. } => "not_hermitian",
            Error::NotUnitary { .. } => "not_unitary",
            Error::InvalidState(_) => "invalid_state",
            Error::NoPureFraction => "no_pure_fraction",
            Error::NoSignal => "no_signal",
            Error::Unsupported(_) => "unsupported",
            Error::Reconstruction(_) => "reconstruction",
            Error::MalformedCircuit { .. } => "malformed_circuit",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
