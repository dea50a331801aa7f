use thiserror::Error;

/// Errors raised by the verification engine.
///
/// Numerical failures that still carry a usable estimate (budget exhaustion,
/// slow or divergent limits) are *not* errors; they are reported through the
/// status fields of [`crate::integrate::QuadResult`] and
/// [`crate::integrate::LimitResult`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point {point:?} lies outside chart `{chart}`")]
    OutsideDomain { chart: String, point: Vec<f64> },

    #[error("moment map is not proper: {0}")]
    ImproperMoment(String),

    #[error("unsupported manifold: {0}")]
    UnsupportedManifold(String),

    #[error("singular Euler factor at `{point}`: X is not strongly regular (|λ(X)| = {min_pairing:e})")]
    SingularEuler { point: String, min_pairing: f64 },

    #[error("inconsistent catalog: {0}")]
    InconsistentCatalog(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("non-finite value during evaluation: {0}")]
    Evaluation(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("capability exceeded: {0}")]
    Capability(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
