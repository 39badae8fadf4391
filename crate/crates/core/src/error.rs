use alloc::string::String;
use core::fmt;

/// Errors raised by mesh construction, assembly and the solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A precondition on the inputs was violated.
    InvalidInput(String),
    /// The magnetic field vanished where its direction was needed.
    ZeroField { point: [f64; 3] },
    /// A diagonal block could not be inverted.
    SingularBlock { row: usize },
    /// A dense or sparse factorization failed.
    SingularMatrix(String),
    /// An exact reference function with zero norm was passed to an error measure.
    ZeroNormReference,
    /// An iterative solve hit its iteration cap.
    NotConverged {
        context: String,
        iterations: usize,
        rel_residual: f64,
    },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::ZeroField { point } => write!(
                f,
                "magnetic field vanishes at ({}, {}, {}); the upwind direction is undefined",
                point[0], point[1], point[2]
            ),
            Error::SingularBlock { row } => write!(f, "singular diagonal block in block row {row}"),
            Error::SingularMatrix(msg) => write!(f, "singular matrix: {msg}"),
            Error::ZeroNormReference => write!(f, "reference function has zero L2 norm"),
            Error::NotConverged {
                context,
                iterations,
                rel_residual,
            } => write!(
                f,
                "{context}: no convergence after {iterations} iterations (relative residual {rel_residual:.3e})"
            ),
        }
    }
}

impl core::error::Error for Error {}
