//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised while building, evaluating or analysing elements.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation (bad entity, shape mismatch, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// The requested combination is not implemented.
    #[error("unsupported: {0}")]
    Capability(String),
    /// A rationomial was evaluated where its denominator vanishes.
    #[error("singularity: {0}")]
    Singularity(String),
    /// The dual matrix of an element is singular to working tolerance.
    #[error("degenerate element: dual matrix is singular (sigma_min/sigma_max = {ratio:.3e}); near-null combination of functionals: {combination}")]
    DegenerateElement { ratio: f64, combination: String },
    /// Invalid verification or lattice configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// Malformed textual input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn capability<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Capability(msg.into()))
}
