use thiserror::Error;

/// Errors raised by library operations. Negative analysis outcomes are values, not errors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CrError {
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("reality violated at j={j}: monomial {monomial}")]
    Reality { j: usize, monomial: String },
    #[error("basepoint not on set")]
    NotOnSet,
    #[error("point not on set")]
    PointNotOnSet,
    #[error("point not CR")]
    NotCr,
    #[error("implicit solve failed: {0}")]
    ImplicitSolve(String),
    #[error("order must be >= 2")]
    OrderTooSmall,
    #[error("not a polynomial in elimination variable")]
    NotInVariable,
    #[error("zero polynomial has no degree")]
    ZeroPolynomial,
    #[error("composition not supported")]
    Composition,
    #[error("normality violated at j={j}: monomial {monomial}")]
    Normality { j: usize, monomial: String },
    #[error("not homogeneous: {0}")]
    NotHomogeneous(String),
    #[error("remainder not higher weight: {0}")]
    RemainderWeight(String),
    #[error("ansatz degree insufficient (searched weights up to {0})")]
    AnsatzInsufficient(u32),
    #[error("witness not tangent: {0}")]
    NotTangent(String),
    #[error("h not independent at center")]
    NotIndependent,
    #[error("resultant vanished identically: common factor {0}")]
    ResultantVanished(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, CrError>;
