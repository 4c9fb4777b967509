use thiserror::Error;

/// Failure modes of every geometric operation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("vector lies outside the conic domain: {0}")]
    ConeViolation(String),
    #[error("covector lies outside the dual cone: {0}")]
    DualConeViolation(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("singular tensor: {0}")]
    SingularTensor(String),
    #[error("wind field is not unit at {point:?}: |W| = {norm}")]
    NotUnitWind { point: Vec<f64>, norm: f64 },
    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },
    #[error("invalid profile function: {0}")]
    DomainViolation(String),
    #[error("point outside the admissible domain: {0}")]
    OutOfDomain(String),
    #[error("neither normal ray lies in the dual cone at {0:?}")]
    NoConicNormal(Vec<f64>),
    #[error("immersion frame is degenerate at {0:?}")]
    FrameDegenerate(Vec<f64>),
    #[error("flag is degenerate: {0}")]
    DegenerateFlag(String),
    #[error("empty domain: {0}")]
    EmptyDomain(String),
    #[error("level {level} has {found} admissible samples, need {required}")]
    InsufficientSamples { level: f64, found: usize, required: usize },
    #[error("wind field is not Killing: residual {residual:e} at {point:?}")]
    NotKilling { point: Vec<f64>, residual: f64 },
    #[error("Riemannian normal equals -W at {0:?}")]
    NormalExcluded(Vec<f64>),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl GeometryError {
    /// Variant name, stable for diagnostics and reports.
    pub fn kind(&self) -> &'static str {
        match self {
            GeometryError::ConeViolation(_) => "ConeViolation",
            GeometryError::DualConeViolation(_) => "DualConeViolation",
            GeometryError::DimensionMismatch { .. } => "DimensionMismatch",
            GeometryError::SingularTensor(_) => "SingularTensor",
            GeometryError::NotUnitWind { .. } => "NotUnitWind",
            GeometryError::NewtonDivergence { .. } => "NewtonDivergence",
            GeometryError::DomainViolation(_) => "DomainViolation",
            GeometryError::OutOfDomain(_) => "OutOfDomain",
            GeometryError::NoConicNormal(_) => "NoConicNormal",
            GeometryError::FrameDegenerate(_) => "FrameDegenerate",
            GeometryError::DegenerateFlag(_) => "DegenerateFlag",
            GeometryError::EmptyDomain(_) => "EmptyDomain",
            GeometryError::InsufficientSamples { .. } => "InsufficientSamples",
            GeometryError::NotKilling { .. } => "NotKilling",
            GeometryError::NormalExcluded(_) => "NormalExcluded",
            GeometryError::Config(_) => "Config",
            GeometryError::Unsupported(_) => "Unsupported",
        }
    }
}

pub type Result<T> = std::result::Result<T, GeometryError>;

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(GeometryError::DimensionMismatch { expected, actual })
    }
}
