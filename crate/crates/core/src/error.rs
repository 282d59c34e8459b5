use crate::cartan::{CartanError, DegreeVector};
use crate::laurent::LaurentError;
use crate::linalg::LinalgError;
use crate::literal::LiteralError;
use crate::scalars::ScalarError;

/// Crate-wide error for operations that cross module boundaries.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Cartan(#[from] CartanError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Literal(#[from] LiteralError),
    #[error("operands carry different signs")]
    MixedSigns,
    #[error("element is not homogeneous")]
    Inhomogeneous,
    #[error("horizontal degrees differ: {0} vs {1}")]
    HdegMismatch(DegreeVector, DegreeVector),
    #[error("same-color cancellation failed while symmetrizing")]
    CancellationFailed,
    #[error("slope band is empty: lower end must lie strictly below upper end")]
    EmptyBand,
    #[error("constant term changed when truncation caps were raised ({0} vs {1})")]
    CapInstability(String, String),
    #[error("a denominator binomial has a zero constant")]
    ZeroConstantDivisor,
    #[error("a-recursion produced a negative or fractional value at {0}")]
    NonIntegerSolution(DegreeVector),
    #[error("dimension table has no entry at {0}")]
    MissingDimensionTable(DegreeVector),
    #[error("malformed word literal: {0}")]
    BadWord(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
