use thiserror::Error;

use crate::field::Field;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("shape mismatch: {op} of {left:?} and {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(Field, Field),
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),
    #[error("operation `{op}` is not supported over {field}")]
    UnsupportedField { op: &'static str, field: Field },
    #[error("invalid modulus {0}: expected a prime below 65536")]
    InvalidModulus(u32),
    #[error("cannot parse scalar {0:?}")]
    ParseScalar(String),
    #[error("cannot parse field descriptor {0:?}")]
    ParseField(String),
}

/// Errors raised by module constructions and invariant computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("grid mismatch between modules")]
    GridMismatch,
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(Field, Field),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid point {0:?} is outside the grid")]
    PointOutOfRange(Vec<usize>),
    #[error("points are not comparable: {0:?} is not <= {1:?}")]
    NotComparable(Vec<usize>, Vec<usize>),
    #[error("support is not order-convex: {0:?} lies between support points but is missing")]
    NotConvex(Vec<usize>),
    #[error("axis {0} is not uniformly spaced")]
    NonUniformAxis(usize),
    #[error("shape mismatch at {location}: expected {expected:?}, found {found:?}")]
    Shape {
        location: String,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("idempotent rejected: {0}")]
    InvalidIdempotent(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("{location}: {message}")]
    Document { location: String, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
