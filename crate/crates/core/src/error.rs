use thiserror::Error;

/// Errors raised by the analysis, synthesis and evolution routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix dimension {0} exceeds the supported maximum of 32")]
    DimensionTooLarge(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("eigenvalue iteration did not converge within {iterations} steps")]
    NonConvergence { iterations: usize },
    #[error("singular system: pivot {pivot:e} at step {step} is below tolerance {threshold:e}")]
    SingularSystem { step: usize, pivot: f64, threshold: f64 },
    #[error("invalid coupling system: {0}")]
    InvalidSystem(String),
    #[error("coupling matrix has repeated eigenvalues (min separation {separation:e} <= {threshold:e})")]
    RepeatedEigenvalues { separation: f64, threshold: f64 },
    #[error("frequencies {first} and {second} coincide within block k = {k}")]
    CollisionInBlock { k: i64, first: usize, second: usize },
    #[error("target mode n = {n} outside 1..={k_max}")]
    ModeOutOfRange { n: usize, k_max: usize },
    #[error("control weight beta_{l} has magnitude {magnitude:e} (Kalman condition fails)")]
    BetaZero { l: usize, magnitude: f64 },
    #[error("Gram condition estimate {cond:e} exceeds cap {cap:e}")]
    ConditioningExceeded { cond: f64, cap: f64 },
    #[error("eigenvector {l} has a vanishing second component")]
    DegenerateEigenvector { l: usize },
    #[error("sample spacing {dt:e} exceeds the sampling limit {limit:e}")]
    GridTooCoarse { dt: f64, limit: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for failures of the numerical solve (as opposed to bad input or
    /// violated hypotheses).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularSystem { .. }
                | Error::ConditioningExceeded { .. }
                | Error::NonConvergence { .. }
                | Error::CollisionInBlock { .. }
                | Error::GridTooCoarse { .. }
        )
    }

    /// True when the error means a controllability hypothesis does not hold.
    pub fn is_condition_violation(&self) -> bool {
        matches!(
            self,
            Error::RepeatedEigenvalues { .. } | Error::BetaZero { .. } | Error::DegenerateEigenvector { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
