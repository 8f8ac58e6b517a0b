use thiserror::Error;

/// Errors raised by the verification kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("interpolation range error: r = {r} outside tabulated range [{lo}, {hi}]")]
    InterpolationRange { r: f64, lo: f64, hi: f64 },

    #[error("range error: {what} overflowed at mode {mode:?}")]
    Range { what: String, mode: Vec<i64> },

    #[error("argument error: {0}")]
    Argument(String),

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("root split undefined: root {re} + {im}i lies within {tol} of the real axis")]
    SplitUndefined { re: f64, im: f64, tol: f64 },

    #[error("structural error: {0}")]
    Structural(String),

    #[error(
        "exceptional regularity: s = {0} lies in the exceptional set; the data space there is \
         defined by interpolation and only weight-level checks are available"
    )]
    ExceptionalRegularity(f64),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
