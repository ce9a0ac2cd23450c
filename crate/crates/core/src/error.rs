use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("subsystem index {index} out of range for {count} subsystems")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("invalid dimensions: {0}")]
    InvalidDims(String),

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(String),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("map is not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid probe: {0}")]
    InvalidProbe(String),

    #[error("negative probability {value:.3e} ({context})")]
    NegativeProbability { value: f64, context: String },

    #[error("operator basis does not span the operator space (rank {rank} < {needed})")]
    NonSpanningBasis { rank: usize, needed: usize },

    #[error("sector projectors are not a complete orthogonal family: {0}")]
    IncompleteSectors(String),

    #[error("POVM element exceeds identity (max eigenvalue {0})")]
    PovmExceedsIdentity(f64),

    #[error("shot budget must be positive")]
    ZeroShots,

    #[error("computation fault: {0}")]
    ComputationFault(String),

    #[error("malformed data: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_mismatch(expected: impl ToString, found: impl ToString) -> Error {
    Error::DimensionMismatch {
        expected: expected.to_string(),
        found: found.to_string(),
    }
}
