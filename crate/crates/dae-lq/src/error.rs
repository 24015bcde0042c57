use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("ambient dimension mismatch: {0} vs {1}")]
    AmbientMismatch(usize, usize),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("time grid needs at least {needed} points, got {got}")]
    GridTooShort { needed: usize, got: usize },
    #[error("time grid is not uniform")]
    NonUniformGrid,
    #[error("time grids do not match")]
    GridMismatch,
    #[error("friend equations not solvable: residual {0:e}")]
    ResidualTooLarge(f64),
    #[error("subspace is not invariant: residual {0:e}")]
    NotInvariant(f64),
    #[error("systems are not feedback equivalent: {0}")]
    NotEquivalent(String),
    #[error("Riccati solution became non-finite")]
    NonFiniteP,
    #[error("no stabilizing initial gain found")]
    NoStabilizingStart,
    #[error("initial value is not behaviorally stabilizable")]
    NotStabilizable,
    #[error("initial value is not consistent: distance {0:e}")]
    InconsistentInitialState(f64),
    #[error("closed-loop constraint violated: residual {0:e}")]
    ConstraintViolated(f64),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
}

pub type Result<T> = std::result::Result<T, Error>;
