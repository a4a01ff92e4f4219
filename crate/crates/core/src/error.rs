use thiserror::Error;

/// Errors produced by the analysis routines.
///
/// Values are carried as `f64` regardless of the scalar type used for the
/// computation so that errors stay non-generic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("point ({x}, {y}) is within {distance:e} of the singularity at ({sx}, {sy})")]
    SingularityProximity {
        x: f64,
        y: f64,
        sx: f64,
        sy: f64,
        distance: f64,
    },

    #[error("state carries no time tag")]
    MissingTimeTag,

    #[error("outside the parameter domain: {0}")]
    Domain(String),

    #[error("orbit is not closed: {0}")]
    NotClosed(String),

    #[error("integration failed at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },

    #[error("no non-degenerate center: {0}")]
    NotACenter(String),

    #[error("winding number is ambiguous (fractional part {fraction:.3})")]
    AmbiguousWinding { fraction: f64 },

    #[error("Newton iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("invalid stirring protocol: {0}")]
    InvalidProtocol(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
