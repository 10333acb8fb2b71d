use serde::Serialize;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Singular-value summary attached to [`Error::SingularChannel`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularValueReport {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub rcond: f64,
    pub numerical_rank: usize,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum Error {
    #[error("input is not Hermitian (max |A - A†| = {deviation:.3e})")]
    NonHermitianInput { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error(
        "channel is singular at rcond {}: sigma_min = {:.3e}, sigma_max = {:.3e} (rank {} of {})",
        .0.rcond, .0.sigma_min, .0.sigma_max, .0.numerical_rank, .0.size
    )]
    SingularChannel(SingularValueReport),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("t = {t} with step {h} leaves the domain [{t_min}, {t_max}]")]
    DomainExceeded { t: f64, h: f64, t_min: f64, t_max: f64 },

    #[error("invalid family at t = {t}: {reason}")]
    InvalidFamily { t: f64, reason: String },

    #[error("degenerate denominator: {0} vanishes")]
    DegenerateDenominator(String),

    #[error("t = {t} is outside the validity window [0, 1/2]")]
    OutsideValidityWindow { t: f64 },

    #[error("{factor} is not symplectic (max |R J Rᵀ - J| = {deviation:.3e})")]
    NotSymplectic { factor: String, deviation: f64 },

    #[error("dilation produced an invalid channel (min eigenvalue {min_eigenvalue:.3e})")]
    InvalidDilation { min_eigenvalue: f64 },

    #[error("invalid covariance matrix (min eigenvalue of 2S + iJ is {min_eigenvalue:.3e})")]
    InvalidState { min_eigenvalue: f64 },

    #[error("invalid Gaussian channel (min eigenvalue of the validity matrix is {min_eigenvalue:.3e})")]
    InvalidChannel { min_eigenvalue: f64 },

    #[error("X_t is singular at t = {t} (det = {det:.3e})")]
    SingularX { t: f64, det: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
