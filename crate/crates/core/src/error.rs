use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeomError {
    #[error("point {coords:?} lies outside the chart of {space}")]
    OutsideChart { space: String, coords: Vec<f64> },

    #[error("point {coords:?} lies outside the domain of {field}")]
    OutsideDomain { field: String, coords: Vec<f64> },

    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("metric is singular or not positive definite")]
    SingularMetric,

    #[error("linear system lost rank (normalized pivot {smallest:e})")]
    RankDeficient { smallest: f64 },

    #[error("embedding Jacobian is rank deficient at {coords:?}")]
    ChartDegeneracy { coords: Vec<f64> },

    #[error("ambient vector is not tangent: residual {residual:e}")]
    NotTangent { residual: f64 },

    #[error("vectors span a degenerate plane (gram determinant {gram:e})")]
    DegeneratePlane { gram: f64 },

    #[error("vector field vanishes at {coords:?} (norm {norm:e})")]
    DegenerateField { coords: Vec<f64>, norm: f64 },

    #[error("gradient vanishes at {coords:?} (norm {norm:e})")]
    CriticalPoint { coords: Vec<f64>, norm: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T, E = GeomError> = std::result::Result<T, E>;
