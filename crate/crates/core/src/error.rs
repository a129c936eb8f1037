use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported cooperation order {0}")]
    UnsupportedOrder(usize),

    #[error("point ({x}, {y}) lies outside the cooperation region")]
    OutsideRegion { x: f64, y: f64 },

    #[error("point ({x}, {y}) coincides with a base station")]
    AtBaseStation { x: f64, y: f64 },

    #[error("tessellation too small: {0}")]
    InsufficientExtent(String),

    #[error("kernel singular: polygon contains the origin")]
    SingularKernel,

    #[error("quadrature did not converge (estimated error {estimate:e})")]
    QuadratureDiverged { estimate: f64 },

    #[error("moment matching degenerate: gamma2 = {gamma2:e} <= gamma1^2 = {gamma1_sq:e}")]
    DegenerateMoments { gamma1_sq: f64, gamma2: f64 },

    #[error("bracket exhausted: {0}")]
    BracketExhausted(String),
}

pub type Result<T> = std::result::Result<T, Error>;
