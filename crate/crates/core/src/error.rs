use thiserror::Error;

/// Errors raised by the library. Infeasible linear systems are not errors;
/// they are reported through [`crate::gf2::AffineSolutionSet::is_feasible`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("lattice dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    #[error("extents must list one vertex count >= 1 per axis: {0}")]
    InvalidExtents(String),

    #[error("{kind} index {index} out of range (count {count})")]
    IndexOutOfRange {
        kind: &'static str,
        index: usize,
        count: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("system has no solution: {0}")]
    Infeasible(String),

    #[error("too large: {0}")]
    TooLarge(String),

    #[error("invalid probability {0}; expected a value in [0, 1]")]
    InvalidProbability(f64),

    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),

    #[error("invalid loop: {0}")]
    InvalidLoop(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("configuration kind mismatch: {0}")]
    KindMismatch(String),

    #[error("no bounding subsurface: plaquette set contains no surface with the requested boundary")]
    NoBoundingSubsurface,

    #[error("invalid chain specification: {0}")]
    InvalidSpec(String),

    #[error("loops overlap: {0}")]
    OverlappingLoops(String),

    #[error("insufficient statistics: {0}")]
    InsufficientStatistics(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
