use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point must have at least one coordinate")]
    EmptyPoint,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point is outside the cone: facet {facet} evaluates negative")]
    NotInCone { facet: usize },

    #[error("point is outside the cone: not in the spanned subspace")]
    NotInSpan,

    #[error("coordinate {index} is negative; the map is defined on the nonnegative orthant")]
    NegativeCoordinate { index: usize },

    #[error("coordinate {index} must be strictly positive")]
    NonpositiveCoordinate { index: usize },

    #[error("{op} requires floating-point arithmetic; not available in exact mode")]
    ExactModeUnsupported { op: &'static str },

    #[error("syntax error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("semantic error at line {line}, column {col}: {msg}")]
    Semantic { line: usize, col: usize, msg: String },

    #[error("{0}")]
    Domain(String),

    #[error("infeasible construction: {0}")]
    Infeasible(String),

    #[error("{what} exceeds the enumeration budget (limit {limit})")]
    Budget { what: String, limit: u64 },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
