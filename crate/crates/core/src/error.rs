use thiserror::Error;

/// Errors produced by the interferometer toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("reflectivity {name} = {value} is outside the open interval (0, 1)")]
    DegenerateReflectivity { name: &'static str, value: f64 },

    #[error("beam splitter inputs are not orthonormal (deviation {0:e})")]
    NonOrthogonalInputs(f64),

    #[error("vector norm {0:e} is too small to normalize")]
    ZeroNorm(f64),

    #[error("D1 and D2 are parallel; no unique state orthogonal to both")]
    DegenerateKernel,

    #[error("context {context} probabilities sum to {sum}")]
    ContextSumViolation { context: String, sum: f64 },

    #[error("probability {value:e} for path {path} is negative beyond rounding")]
    NegativeProbability { path: String, value: f64 },

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (minimum eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("density matrix trace is {0}, expected 1")]
    BadTrace(f64),

    #[error("postselection on outcome {outcome} is impossible (probability {probability:e})")]
    ImpossiblePostselection { outcome: String, probability: f64 },

    #[error("coupling angle {0} rad exceeds the weak regime (max 0.3)")]
    CouplingTooLarge(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
