//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical parameter or quantum label failed validation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The adaptive stepper could not meet the requested tolerance.
    #[error("integrator failed to converge at t = {t} ps (step size underflow)")]
    NonConvergence { t: f64 },

    /// Population reached the top of the truncated basis; J_max is too small.
    #[error("truncation leak {leak:.3e} in the top two basis states (J_max = {j_max} too small)")]
    TruncationLeak { j_max: u32, leak: f64 },

    /// The first-order kernel vanishes; its eigenbasis is not defined.
    #[error("degenerate first-order kernel (beta = 0): eigenvectors undefined")]
    DegenerateBeta,

    /// Configuration file or CLI parameter error.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures of the numerical layer (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::TruncationLeak { .. } | Error::DegenerateBeta
        )
    }
}
