use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty input")]
    Empty,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("non-finite input value")]
    NonFinite,
    #[error("evaluation grid must be nonempty and strictly increasing")]
    InvalidGrid,
    #[error("sample size {got} too small (need at least {need})")]
    SampleTooSmall { got: usize, need: usize },
    #[error("observation does not match the {expected} schema")]
    SchemaMismatch { expected: &'static str },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("singular matrix (pivot {pivot:e} below threshold)")]
    Singular { pivot: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("error law {0} has no finite location score")]
    NoScore(&'static str),
    #[error("no covariate variation; the partial likelihood is flat")]
    NoCovariateVariation,
    #[error("monotone likelihood: the partial likelihood estimate diverges to {direction}")]
    MonotoneLikelihood { direction: &'static str },
    #[error("Newton iteration did not converge after {iterations} steps (score {score:e})")]
    NoConvergence { iterations: usize, score: f64 },
    #[error("zero scale: all observations coincide with theta")]
    ZeroScale,
    #[error("constraint function admits no centred measure on these data")]
    InfeasibleConstraint,
    #[error("time {t} lies outside the estimation window [0, {t0}]")]
    OutsideWindow { t: f64, t0: f64 },
    #[error("degenerate efficient information {0:e}")]
    DegenerateInformation(f64),
    #[error("contrast function is not centred (mean {0:e})")]
    NotCentred(f64),
    #[error("estimate has the wrong shape for this operation")]
    EstimateShape,
    #[error("{failed} of {total} replications failed")]
    TooManyFailures { failed: usize, total: usize },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
