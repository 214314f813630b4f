use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GlabError {
    #[error("field mismatch")]
    FieldMismatch,
    #[error("ambient mismatch: expected P^{expected}, got P^{got}")]
    AmbientMismatch { expected: usize, got: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not an odd prime")]
    NotPrime(u64),
    #[error("polynomial is not homogeneous of degree {expected}")]
    NonHomogeneous { expected: usize },
    #[error("not decomposable")]
    NotDecomposable,
    #[error("expected a codimension-2 subspace, got dimension {dim} in P^{ambient}")]
    WrongCodimension { dim: i64, ambient: usize },
    #[error("line is not on the incidence divisor")]
    NotOnDivisor,
    #[error("line outside chart with pivots ({0}, {1})")]
    OutsideChart(usize, usize),
    #[error("degenerate evaluation at parameter {0}")]
    DegenerateEvaluation(String),
    #[error("zero parameter vector")]
    ZeroParameter,
    #[error("projection undefined on family: generic member meets the center")]
    ProjectionUndefined,
    #[error("witness not contained in the fiber locus")]
    WitnessNotInFiber,
    #[error("no witness rule for this family")]
    NoWitnessRule,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, GlabError>;
