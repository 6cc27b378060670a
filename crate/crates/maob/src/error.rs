use thiserror::Error;

/// Errors shared across the geometry, analytic, solver and analysis modules.
#[derive(Debug, Error)]
pub enum MaobError {
    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("no coincidence set")]
    EmptyCellSet,
    #[error("on symmetry axis (rho or r vanishes)")]
    OnSymmetryAxis,
    #[error("outside {{r <= tau}} validity region: r = {r}, tau = {tau}")]
    OutsideValidity { r: f64, tau: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty sample")]
    EmptySample,
    #[error("insufficient dynamic range: {0}")]
    InsufficientRange(String),
    #[error("below resolution: {0}")]
    BelowResolution(String),
    #[error("comparison hypotheses not met: {0}")]
    ComparisonHypotheses(String),
    #[error("increase M1: {0}")]
    IncreaseM1(String),
    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, MaobError>;
