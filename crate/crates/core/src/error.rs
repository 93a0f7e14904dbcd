use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("wrong symplectic space kind: {0}")]
    WrongSpaceKind(&'static str),

    #[error("frame is not Lagrangian: {0}")]
    NotLagrangian(String),

    /// A singular value sits too close to the rank threshold to decide.
    #[error("borderline rank decision: singular value {sigma:e} is within a factor 10 of the threshold {threshold:e}")]
    Borderline { sigma: f64, threshold: f64 },

    #[error("non-finite coefficient at x = {0}")]
    NonFinite(f64),

    #[error("step size underflow ({steps} steps requested)")]
    StepUnderflow { steps: usize },

    #[error("level {level} lies within {band:e} of the eigenvalue {eigenvalue}")]
    CutoffOnEigenvalue { level: f64, eigenvalue: f64, band: f64 },

    #[error("unresolved root cluster in [{lo}, {hi}]")]
    RootCluster { lo: f64, hi: f64 },

    #[error("eigenvalue branch lost simplicity near theta = {theta}")]
    BranchCollision { theta: f64 },

    #[error("non-regular crossing at s = {s} on segment {segment} (form eigenvalues {eigenvalues:?})")]
    NonRegular { segment: usize, s: f64, eigenvalues: Vec<f64> },

    #[error("crossing localization is ambiguous on [{lo}, {hi}] of segment {segment} (smallest singular value {sigma:e})")]
    AmbiguousCrossing { segment: usize, lo: f64, hi: f64, sigma: f64 },

    #[error("spectral flow could not separate the spectrum from the reference arc near s = {s} on segment {segment}")]
    Partition { segment: usize, s: f64 },

    #[error("unexpected crossing on the floor edge at s = {s}")]
    FloorCrossing { s: f64 },

    #[error("hypothesis rejected: {0}")]
    Hypothesis(String),

    #[error("the potential has no derivative")]
    NoDerivative,

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
