use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("tabulated CGF is not convex with psi(0) = 0: {0}")]
    NonConvexTable(String),
    #[error("value {0} is outside the representable range of the dual")]
    OutOfRange(f64),
    #[error("two-sample radius requested without a second index")]
    MissingSecondIndex,
    #[error("boundary is not monotone: first violation at t = {0}")]
    MonotonicityViolated(u64),
    #[error("empty sample")]
    EmptySample,
    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("category {0} has positive count but zero reference mass")]
    AbsoluteContinuityViolated(usize),
    #[error("marginals do not sum to one (got {0} and {1})")]
    UnbalancedMarginals(f64, f64),
    #[error("only dimension 1 is supported, got {0}")]
    UnsupportedDimension(usize),
    #[error("exact enumeration needs t <= 20, got {0}")]
    ExactTooLarge(usize),
    #[error("observation does not match monitor kind: {0}")]
    KindMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
