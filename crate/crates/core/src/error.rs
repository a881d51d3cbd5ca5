use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Query at or after the detected vanish of the scale factor.
    #[error("t = {t} is at or after blowup (vanish bracket [{t_lower}, {t_upper}])")]
    AfterBlowup { t: f64, t_lower: f64, t_upper: f64 },

    #[error("t = {t} lies outside the integrated interval [{t_start}, {t_end}]")]
    OutOfRange { t: f64, t_start: f64, t_end: f64 },

    /// A stencil straddles the edge of the compact support of a θ≠1 profile.
    #[error("stencil at (t = {t}, r = {r}) touches the support boundary")]
    SupportBoundary { t: f64, r: f64 },

    #[error("integration failed at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },

    #[error("quadrature did not converge (achieved error estimate {achieved:e})")]
    Quadrature { achieved: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
