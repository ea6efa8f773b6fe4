use crate::hgroup::HPoint;

/// Errors raised by the geometry, chart and estimator layers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("geodesic parameter {t} outside the maximal interval (|t| < {limit})")]
    ParameterOutOfRange { t: f64, limit: f64 },

    #[error("root finder did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("gradient vanishes at {0:?}")]
    DegenerateGradient(HPoint),

    #[error("characteristic point at {point:?} (|n_h| = {nh_norm:e})")]
    CharacteristicPoint { point: HPoint, nh_norm: f64 },

    #[error("projection back onto the surface failed near {0:?}")]
    StepTooLarge(HPoint),

    #[error("point outside the certified chart domain: {0}")]
    OutOfChart(String),

    #[error("no boundary crossing on the chart axis: {0}")]
    NoRoot(String),

    #[error("boundary crosses the chart axis more than once: {0}")]
    MultipleRoots(String),

    #[error("tube radius {r} exceeds the nearest-point reach: {detail}")]
    ReachExceeded { r: f64, detail: String },

    #[error("domain has {count} characteristic quadrature nodes (min |n_h| = {min_nh:e})")]
    CharacteristicDomain { count: usize, min_nh: f64 },

    #[error("design matrix is ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
