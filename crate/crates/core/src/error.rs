//! Error taxonomy shared by every module.
//!
//! Errors are split by what the caller can do about them: `Structural`
//! (mismatched lattices, wrong argument shapes), `Domain` (empty masks,
//! out-of-range parameters), `Precondition` (input data violates a
//! documented requirement, e.g. negative-frequency energy), `Numerical`
//! (an iterative solver failed to converge; carries the last residual).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Arguments are structurally incompatible (lattice mismatch, wrong lengths).
    #[error("structural error: {0}")]
    Structural(String),

    /// A parameter or domain is outside the operation's range of definition.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data violates a documented precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An iterative method did not converge to the requested tolerance.
    #[error("numerical error: {msg} (residual {residual:.3e})")]
    Numerical { msg: String, residual: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed file contents (bad magic bytes, invalid header, truncation).
    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
    pub fn numerical(msg: impl Into<String>, residual: f64) -> Self {
        Error::Numerical {
            msg: msg.into(),
            residual,
        }
    }
    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    /// Stable machine-readable kind tag, used by the CLI error channel.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Structural(_) => "structural",
            Error::Domain(_) => "domain",
            Error::Precondition(_) => "precondition",
            Error::Numerical { .. } => "numerical",
            Error::Io(_) => "io",
            Error::Format(_) => "format",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
