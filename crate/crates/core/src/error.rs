use thiserror::Error;

/// Errors raised by the decision procedures and their input validation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("missing factorization square for ({0}, {1})")]
    MissingSquare(String, String),
    #[error("factorization squares are not bijective: {0}")]
    NonBijectiveSquares(String),
    #[error("factorization squares fail associativity on ({0}, {1}, {2})")]
    AssociativityFailure(String, String, String),
    #[error("morphisms are not composable: {0}")]
    NotComposable(String),
    #[error("degree out of range: {0}")]
    DegreeOutOfRange(String),
    #[error("not a cycle: {0}")]
    NotACycle(String),
    #[error("degenerate cycle: degree {0} has a zero coordinate")]
    DegenerateCycle(String),
    #[error("not a groupoid element: {0}")]
    NotAGroupoidElement(String),
    #[error("cyclic limit rules through family {0}")]
    CyclicLimits(String),
    #[error("discontinuous map: {0}")]
    DiscontinuousMap(String),
    #[error("unsupported presentation: {0}")]
    UnsupportedPresentation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
