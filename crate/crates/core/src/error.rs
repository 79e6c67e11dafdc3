use thiserror::Error;

/// Errors raised by the state, channel, measure and correction layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized (deviation {0:.3e})")]
    NotNormalized(f64),

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("trace is not 1 (deviation {0:.3e})")]
    TraceViolation(f64),

    #[error("kraus operators violate completeness (deviation {0:.3e})")]
    CompletenessViolation(f64),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NonUnitary(f64),

    #[error("basis is not orthonormal and complete (deviation {0:.3e})")]
    NotOrthonormal(f64),

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("invalid measurement: {0}")]
    InvalidPovm(String),

    #[error("ensemble does not average to the target marginal (deviation {0:.3e})")]
    InfeasibleEnsemble(f64),

    #[error("not correctable: {0}")]
    NotCorrectable(String),

    #[error("correctability certificates disagree: {0}")]
    CertificateDisagreement(String),

    #[error("measurement set is rank deficient (rank {rank}, required {required})")]
    RankDeficient { rank: usize, required: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
