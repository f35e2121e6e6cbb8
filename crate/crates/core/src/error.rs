use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("backend mismatch: {0}")]
    BackendMismatch(String),

    #[error("coefficient z^{index} requested but the series is only trustworthy to order {order}")]
    BeyondOrder { index: usize, order: usize },

    #[error("series is not normalized (expected coefficients 0, 1 at z^0, z^1)")]
    NotNormalized,

    #[error("leading coefficient precondition violated: {0}")]
    LeadingCoefficient(String),

    #[error("inner series of a composition must have zero constant term")]
    NonzeroInnerConstant,

    #[error("series of order {0} is too short for this operation")]
    TooShort(usize),

    #[error("m-fold symmetry violated at exponent {exponent} (m = {m})")]
    SymmetryViolation { m: usize, exponent: usize },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("unknown catalog function {0:?}")]
    UnknownFunction(String),

    #[error("constraint p_m = -q_m violated (|p_m + q_m| = {0})")]
    Constraint(f64),

    #[error("invalid Carathéodory data: {0}")]
    InvalidCaratheodory(String),

    #[error("could not satisfy the pair constraint after {0} draws")]
    Unachievable(usize),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
