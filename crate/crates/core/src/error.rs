use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch { expected: Vec<usize>, got: Vec<usize> },
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("cannot draw {m} distinct samples from {total} positions")]
    TooManySamples { m: usize, total: usize },
    #[error("index {index} out of range (size {size})")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("sign of the zero matrix is undefined")]
    ZeroMatrix,
    #[error("rank {rank} exceeds min(n1, n2) = {max}")]
    RankTooLarge { rank: usize, max: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("prior has no component in the tangent space")]
    DegeneratePrior,
    #[error("solver diverged at iteration {iteration}")]
    Diverged { iteration: usize },
    #[error("signal too short for estimation: {0}")]
    TooShort(String),
    #[error("ambiguous frequency pairing; candidates {candidates:?}")]
    AmbiguousPairing { candidates: Vec<(f64, f64)> },
    #[error("{m} samples cannot fill {batches} golfing batches")]
    TooFewSamples { m: usize, batches: usize },
    #[error("eigenvalue computation failed")]
    Eigen,
    #[error("json: {0}")]
    Json(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
