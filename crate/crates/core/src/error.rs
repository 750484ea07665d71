use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:e})")]
    NonHermitianInput { asymmetry: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("model has no bath attached")]
    MissingBath,

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("no avoided crossing found in the scanned range")]
    NoCrossingFound,

    #[error("reference point {lambda_ref} is within 2x the outermost crossing at {outermost}")]
    ReferenceTooClose { lambda_ref: f64, outermost: f64 },

    #[error("ramp speed must be positive, got {0}")]
    NonpositiveSpeed(f64),

    #[error("sweep velocity must be positive, got {0}")]
    NonpositiveVelocity(f64),

    #[error("ramp has zero span at lambda = {0}")]
    ZeroSpan(f64),

    #[error("crossing gap {0:e} is degenerate; sudden-switch hold time diverges")]
    DegenerateGap(f64),

    #[error("time {t} outside schedule [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("unreachable path: {0}")]
    UnreachablePath(String),

    #[error("zero energy variance: the initial state is stationary and cannot reach the goal")]
    ZeroVariance,

    #[error("trajectory carries no pure states")]
    NotPureTrajectory,

    #[error("norm drift {drift:e} at t = {t}")]
    NormDrift { t: f64, drift: f64 },

    #[error("trace drift {drift:e} at t = {t}")]
    TraceDrift { t: f64, drift: f64 },

    #[error("Hermiticity correction {correction:e} at t = {t}")]
    HermiticityDrift { t: f64, correction: f64 },

    #[error("density matrix eigenvalue {min_eigenvalue:e} at t = {t}")]
    PositivityBreach { t: f64, min_eigenvalue: f64 },
}

impl Error {
    /// Whether this error reports a breached numerical invariant during a
    /// run, as opposed to bad input.
    pub fn is_numerical_breach(&self) -> bool {
        matches!(
            self,
            Error::NormDrift { .. }
                | Error::TraceDrift { .. }
                | Error::HermiticityDrift { .. }
                | Error::PositivityBreach { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
