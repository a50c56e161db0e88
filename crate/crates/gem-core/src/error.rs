use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point is off the manifold: residual {residual:e} exceeds tolerance {tolerance:e}")]
    OffManifold { residual: f64, tolerance: f64 },
    #[error("vector is not tangent: normal component {normal:e} exceeds tolerance {tolerance:e}")]
    NotTangent { normal: f64, tolerance: f64 },
    #[error("vector is not normal: tangent component {tangent:e} exceeds tolerance {tolerance:e}")]
    NotNormal { tangent: f64, tolerance: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite input")]
    NonFinite,
    #[error("nearest-point projection did not converge after {iterations} iterations")]
    ProjectionDiverged { iterations: usize },
    #[error("geodesic left the tubular validity region at substep {substep}")]
    GeodesicLeftTube { substep: usize },
    #[error("constraint Jacobian is rank deficient: smallest singular value {sigma_min:e} below {bound:e}")]
    RankDeficient { sigma_min: f64, bound: f64 },
    #[error("derivative callback disagrees with finite differences (relative error {relative_error:e})")]
    DerivativeMismatch { relative_error: f64 },
    #[error("invalid parameter `{name}`")]
    InvalidParameter { name: &'static str },
    #[error("curvature bound kappa1 is required but was not declared")]
    MissingCurvatureBound,
    #[error("step {index} failed: {source}")]
    Step {
        index: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
    #[error("curve entry {index} has a non-positive error")]
    DegenerateEntry { index: usize },
    #[error("need at least {needed} curve entries, got {got}")]
    TooFewEntries { needed: usize, got: usize },
    #[error("point clouds have different sizes ({left} vs {right})")]
    SizeMismatch { left: usize, right: usize },
    #[error("point cloud size {size} exceeds the cap of {cap}")]
    TooManyPoints { size: usize, cap: usize },
    #[error("level {level} does not divide the finest step count {fine}")]
    LevelMismatch { level: usize, fine: usize },
}

impl Error {
    pub(crate) fn at_step(self, index: usize) -> Error {
        Error::Step { index, source: alloc::boxed::Box::new(self) }
    }
}
