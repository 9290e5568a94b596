use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point is not in the body")]
    NotInBody,
    #[error("chord is unbounded along the requested direction")]
    UnboundedChord,
    #[error("invalid body: {0}")]
    InvalidBody(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error(
        "rejection sampling infeasible: {accepted} accepted out of {trials} trials; use a burn-in start"
    )]
    RejectionInfeasible { accepted: u64, trials: u64 },
    #[error("bin {bin} expects {expected:.2} samples (< {minimum}); use coarser bins")]
    BinUnderflow {
        bin: usize,
        expected: f64,
        minimum: f64,
    },
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
}

impl Error {
    pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, got })
        }
    }
}
