use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid system parameter `{field}`: {reason}")]
    InvalidSpec { field: &'static str, reason: String },

    #[error("invalid drive parameter `{field}`: {reason}")]
    InvalidDrive { field: &'static str, reason: String },

    #[error("subsystem index {index} out of range (space has {count} subsystems)")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("not a valid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("expectation value of a hermitian operator has imaginary residue {0:e}")]
    ComplexExpectation(f64),

    #[error("Bessel function outside supported domain (order {order}, argument {x})")]
    BesselDomain { order: i64, x: f64 },

    #[error("qubit {qubit} is resonant with the cavity (Δ + δ = 0); dispersive elimination undefined")]
    VanishingDetuning { qubit: usize },

    #[error("sideband series needs orders up to {needed}, beyond the supported {limit}")]
    TruncationExceeded { needed: i64, limit: i64 },

    #[error("sideband truncation {n_max} too small for D/M = {ratio}: tail mass {tail:e}")]
    CombTooNarrow { n_max: usize, ratio: f64, tail: f64 },

    #[error("step size underflow at t = {t:e} s (h = {h:e} s)")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("integrator exceeded {0} steps")]
    TooManySteps(usize),

    #[error("trace drifted by {drift:e} at t = {t:e} s")]
    TraceDrift { t: f64, drift: f64 },

    #[error("non-finite state at t = {t:e} s")]
    NonFinite { t: f64 },

    #[error("sweep point M/2π = {hz:e} Hz failed: {source}")]
    SweepPoint {
        hz: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("drive frequency {hz:e} Hz is not on the sweep grid")]
    OffGrid { hz: f64 },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the time integration itself (as opposed to bad input).
    pub fn is_integration_failure(&self) -> bool {
        match self {
            Error::StepSizeUnderflow { .. }
            | Error::TooManySteps(_)
            | Error::TraceDrift { .. }
            | Error::NonFinite { .. } => true,
            Error::SweepPoint { source, .. } => source.is_integration_failure(),
            _ => false,
        }
    }

    pub(crate) fn spec(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidSpec {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn drive(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidDrive {
            field,
            reason: reason.into(),
        }
    }
}
