//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by simulations, solvers, and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Argument validation failure (dimension mismatch, non-finite input, bad range).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Unknown landscape name or malformed catalog request.
    #[error("catalog error: {0}")]
    Catalog(String),

    /// A trajectory left the guard ball or produced a non-finite state.
    #[error("divergence at step {step} (t = {time}): {detail}")]
    Divergence {
        step: usize,
        time: f64,
        detail: String,
    },

    /// Explicit time step violates the scheme's stability bound.
    #[error("step size {dt} violates stability bound {bound}: {detail}")]
    StepSize { dt: f64, bound: f64, detail: String },

    /// A density cell dropped below the allowed negativity floor.
    #[error("scheme error: {0}")]
    Scheme(String),

    /// The truncated domain is too small for the requested density.
    #[error("domain too small: {0}")]
    Domain(String),

    /// Overflow in a closed-form expression; the log-domain value is attached.
    #[error("overflow: exp argument {exp_arg} too large (log-domain value {log_value})")]
    Overflow { exp_arg: f64, log_value: f64 },

    /// Saddle search failed to converge or found the wrong Hessian signature.
    #[error("saddle search failed: {0}")]
    SaddleSearch(String),

    /// Eigenvalue iteration did not converge.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A theorem hypothesis is violated by the inputs.
    #[error("hypothesis violation: {0}")]
    Hypothesis(String),

    /// Not enough samples inside a fit window.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The schedule never enters the burn-in tolerance band.
    #[error("no finite burn-in threshold: {0}")]
    NoFiniteThreshold(String),

    /// Configuration file parse or validation failure.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 for config errors, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Argument(_) | Error::Catalog(_) => 2,
            _ => 3,
        }
    }
}
