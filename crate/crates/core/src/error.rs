use thiserror::Error;

/// Errors raised by the geometry, measure and balayage layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension must be at least 2, got {0}")]
    BadDimension(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point coincides with the inversion center (maps to infinity)")]
    PoleAtCenter,

    #[error("charge still carries {0} continuous component(s); flatten it first")]
    NotFlattened(usize),

    #[error("component centered at {center:?} with radius {radius} straddles the region boundary")]
    StraddlingComponent { center: Vec<f64>, radius: f64 },

    #[error("integral is undefined: +inf and -inf contributions collide")]
    UndefinedIntegral,

    #[error("discretization level {level} is too small (minimum {min})")]
    LevelTooSmall { level: usize, min: usize },

    #[error("component kind {kind} cannot be discretized by this rule")]
    WrongComponentKind { kind: &'static str },

    #[error("harmonic degree {0} exceeds the conditioning guard (12)")]
    DegreeTooLarge(usize),

    #[error("non-finite sample of the test function at {0:?}")]
    NonFinite(Vec<f64>),

    #[error("invalid test function: {0}")]
    InvalidTestFunction(String),

    #[error("not a candidate measure: {0}")]
    NotCandidate(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("support condition violated: measured {measured}, required below {bound}")]
    SupportTooLarge { measured: f64, bound: f64 },

    #[error("missing family entry for atom at {0:?}")]
    MissingFamilyEntry(Vec<f64>),

    #[error("mask grids differ")]
    GridMismatch,

    #[error("hull algorithms disagree on {0} cell(s); rerun at a smaller cell size")]
    HullDisagreement(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
