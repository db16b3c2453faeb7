use thiserror::Error;

/// Numerical and physical-validity failures raised by the simulation engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {0} exceeds the dense cap of {max}", max = crate::quantum::MAX_DIM)]
    DimensionTooLarge(usize),

    #[error("matrix must have dimension >= 1")]
    EmptyMatrix,

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("{what} is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { what: &'static str, deviation: f64 },

    #[error("trace {trace} differs from 1 by more than {tol:e}")]
    TraceNotUnity { trace: f64, tol: f64 },

    #[error("state has negative eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace drifted by {drift:e} at t = {t}; reduce the step size")]
    TraceDrift { t: f64, drift: f64 },

    #[error("non-unique steady state: Liouvillian null space has dimension {nullity}")]
    NonUniqueSteadyState { nullity: usize },

    #[error("Liouvillian has no null space (smallest singular value {smallest:e})")]
    NoSteadyState { smallest: f64 },

    #[error("Kraus operators are not complete: max |sum K^dag K - I| = {deviation:e}")]
    IncompleteKraus { deviation: f64 },

    #[error(
        "Kraus operators increase the trace: max eigenvalue of sum K^dag K = {max_eigenvalue}"
    )]
    TraceIncreasingKraus { max_eigenvalue: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("cannot derive {quantity}: {missing}")]
    InsufficientParameters {
        quantity: &'static str,
        missing: &'static str,
    },

    #[error(
        "field truncation leakage {deficit:e} at slice {slice} exceeds 1e-8; raise the Fock cutoff"
    )]
    TruncationLeakage { slice: usize, deficit: f64 },

    #[error("slice {slice} is past the end of a {n_slices}-slice pulse")]
    PulseEnded { slice: usize, n_slices: usize },

    #[error("closed form only holds during the pulse: t = {t} > tau = {tau}")]
    OutsidePulse { t: f64, tau: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(invalid(
            name,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}

pub(crate) fn require_non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(invalid(
            name,
            format!("must be finite and >= 0, got {value}"),
        ))
    }
}
