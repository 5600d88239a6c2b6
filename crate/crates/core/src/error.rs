use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("parameter domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature (or another iterative method) did not reach its target.
    #[error("numerical failure: {message} (achieved error estimate {achieved:e})")]
    Numerical { message: String, achieved: f64 },

    /// A requested time lies outside the tabulated profile.
    #[error("time {t} outside profile range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    /// The input does not satisfy a documented precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The ODE integrator could not make progress.
    #[error("integration failure at t = {t}: {message}")]
    Integration { t: f64, message: String },

    /// Malformed parameter file or option value.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
