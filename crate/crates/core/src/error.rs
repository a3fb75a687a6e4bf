use crate::sdp::SdpSolution;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid Pauli letter {0:?}")]
    InvalidPauli(char),

    #[error("generators {0} and {1} do not commute")]
    NonCommuting(usize, usize),

    #[error("code space has dimension {0}, expected 2")]
    CodespaceDimension(usize),

    #[error("syndrome {syndrome:?} has more than one minimum-weight correction ({first} and {second})")]
    AmbiguousSyndrome {
        syndrome: Vec<i8>,
        first: String,
        second: String,
    },

    #[error("syndrome {0:?} has no correction")]
    MissingSyndrome(Vec<i8>),

    #[error("degenerate least-squares design matrix")]
    DegenerateFit,

    #[error("SDP did not converge after {iterations} iterations (gap {gap:e})", iterations = best.iterations, gap = best.gap)]
    NotConverged { best: Box<SdpSolution> },

    #[error("linear algebra failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dims(expected: impl std::fmt::Display, actual: impl std::fmt::Display) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}
