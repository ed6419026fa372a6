use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape: expected {expected}, got {rows}x{cols}")]
    Shape {
        expected: String,
        rows: usize,
        cols: usize,
    },

    #[error("non-finite entries in matrix")]
    NonFinite,

    #[error("time {t} out of range [{start}, {end}]")]
    TimeOutOfRange { t: f64, start: f64, end: f64 },

    #[error("not symplectic: residual {residual:e} exceeds tolerance {tol:e}")]
    NotSymplectic { residual: f64, tol: f64 },

    #[error("matrix is not symmetric: asymmetry {0:e}")]
    NotSymmetric(f64),

    #[error("not diagonalizable by symplectic congruence: eigenvalue {0:e} is not positive")]
    NotPositiveDefinite(f64),

    #[error("singular coefficient: A({t}) = {value:e}")]
    SingularCoefficient { t: f64, value: f64 },

    #[error("blow-up at t = {t}")]
    BlowUp { t: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("expression error: {0}")]
    Expression(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape_error(expected: impl Into<String>, rows: usize, cols: usize) -> Error {
    Error::Shape {
        expected: expected.into(),
        rows,
        cols,
    }
}
