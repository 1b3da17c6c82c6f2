use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {0} is outside the overflow-safe range |x| <= 700")]
    OverflowRange(f64),

    #[error("{count} boundary nodes requested, at least {min} are required")]
    BadCount { count: usize, min: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("kernel order {order} exceeds the table's maximum order {max}")]
    OrderOutOfRange { order: usize, max: usize },

    #[error("distance {r} exceeds the tabulated radius {r_max}")]
    RadiusOutOfRange { r: f64, r_max: f64 },

    #[error("radial integration did not reach tolerance (estimated error {estimate:e})")]
    IntegrationFailure { estimate: f64 },

    #[error("derivative order {deriv} is not available for this basis")]
    UnsupportedDerivative { deriv: usize },

    #[error("source interpolation system is singular")]
    SingularInterpolation,

    #[error("boundary node {index} has no outward normal")]
    MissingNormal { index: usize },

    #[error("inhomogeneous problem requires a particular-solution bundle")]
    MissingParticular,

    #[error("operator iterate R^{order}{{f}} is not available")]
    MissingOperatorIterate { order: usize },

    #[error("the modified Kansa method requires a multiquadric basis")]
    UnsupportedRbf,

    #[error("zero pivot in column {column}")]
    ExactlySingular { column: usize },

    #[error("linear system could not be solved by LU or truncated SVD")]
    SingularSystem,
}
