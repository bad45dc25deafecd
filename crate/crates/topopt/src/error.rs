//! Crate-wide error type.

use std::fmt;

#[derive(Debug)]
pub enum Error {
    /// Degenerate or inconsistent geometry (zero-width rectangle, bad winding).
    InvalidGeometry(String),
    /// Meshes cannot be merged (incompatible interface discretizations,
    /// overlapping elements).
    MergeMismatch(String),
    /// Triplet index outside the declared matrix dimension.
    IndexOutOfRange {
        index: usize,
        n: usize,
    },
    /// Iterative solver did not reach the requested tolerance.
    SolverFailure {
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },
    /// A system that cannot be solved as posed (e.g. no Dirichlet boundary).
    SingularSystem(String),
    /// The sensitivity normalizer vanished; dividing by it would be undefined.
    ZeroSensitivity,
    /// Configuration problem, carrying the offending key.
    Config {
        key: String,
        message: String,
    },
    Io(std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGeometry(msg) => write!(f, "invalid geometry: {msg}"),
            Error::MergeMismatch(msg) => write!(f, "mesh merge mismatch: {msg}"),
            Error::IndexOutOfRange { index, n } => {
                write!(f, "index {index} out of range for dimension {n}")
            }
            Error::SolverFailure {
                iterations,
                residual,
                tolerance,
            } => write!(
                f,
                "solver failed to converge after {iterations} iterations \
                 (residual {residual:.3e}, tolerance {tolerance:.3e})"
            ),
            Error::SingularSystem(msg) => write!(f, "singular system: {msg}"),
            Error::ZeroSensitivity => {
                write!(f, "sensitivity normalizer is zero (state field vanished)")
            }
            Error::Config { key, message } => write!(f, "config error for `{key}`: {message}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
