use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("site index {site} out of range 1..={sites}")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("time step too coarse: total jump probability {total:.4} exceeds 0.1 at dt = {dt}")]
    StepTooCoarse { total: f64, dt: f64 },

    #[error("kick period {period} is not an integer multiple of dt = {dt}")]
    PeriodMismatch { period: f64, dt: f64 },

    #[error("model has no kick")]
    MissingKick,

    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("only {usable} non-degenerate points, need at least 3")]
    TooFewPoints { usable: usize },

    #[error("all neighbour-distance ratios equal one; the fit is undetermined")]
    DegenerateFit,

    #[error("no snapshot at t = {0}")]
    MissingSnapshot(f64),

    #[error("matrix dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("eigendecomposition did not converge")]
    EigenNonConvergence,

    #[error("{0}")]
    Config(String),

    #[error("malformed trajectory file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
