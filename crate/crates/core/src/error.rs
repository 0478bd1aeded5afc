use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input violates an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// The argument lift hit two consecutive samples that are (numerically)
    /// antipodal, so the branch cannot be decided.
    #[error("antipodal ambiguity between samples {index} and {next} (chord {chord:.6})")]
    Antipodal { index: usize, next: usize, chord: f64 },

    /// The Neumann iteration for the Beltrami equation stopped contracting.
    #[error("Beltrami iteration does not contract: {0}")]
    NonContraction(String),

    /// The discretised image curve is not a simple curve around the origin.
    #[error("image curve is not admissible: {0}")]
    BadCurve(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
