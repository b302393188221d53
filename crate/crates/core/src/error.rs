use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("nearest-point iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("cut excludes the witness point (violation {violation:.3e}); the separation oracle is unsound")]
    WitnessExcluded { violation: f64 },

    #[error("start point is not a member of the body")]
    StartNotMember,

    #[error("chord degenerate {count} consecutive times; body looks lower-dimensional")]
    DegenerateChord { count: usize },

    #[error("chord unbounded: the body is not bounded along a sampled direction")]
    UnboundedChord,

    #[error("point is not strictly interior to the inner body")]
    NotInterior,

    #[error("linear system A x = b is inconsistent (residual {residual:.3e})")]
    InconsistentSystem { residual: f64 },

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("oracle budget of {budget} calls exhausted")]
    BudgetExhausted { budget: usize },

    #[error("step left the inner body after re-estimation (block {block})")]
    StepInfeasible { block: usize },

    #[error("instance too large: {0}")]
    TooLarge(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
