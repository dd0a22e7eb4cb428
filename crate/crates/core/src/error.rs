use thiserror::Error;

use crate::lp::LpStatus;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("directed cycle through vertex {0}")]
    CycleDetected(usize),
    #[error("vertex {0} is not reachable from the source")]
    Unreachable(usize),
    #[error("more than {0} s-t paths")]
    PathExplosion(usize),
    #[error("feasible set has more than {0} points")]
    EnumerationTooLarge(usize),
    #[error("zero on the diagonal at row {0}")]
    ZeroDiagonal(usize),
    #[error("matrix is not skew-symmetric")]
    NotSkewSymmetric,
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("LP solve failed: {0:?}")]
    LpFailure(LpStatus),
    #[error("numerical breakdown in float simplex: {0}")]
    NumericalBreakdown(String),
    #[error("bound chain violated: {0}")]
    ChainViolation(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid instance: {0}")]
    Validation(String),
}
