#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{CurvatureBounds, GeodesicIntegratorConfig, Manifold};
use crate::linalg::{Matrix, Vector, MAX_DIM};

/// The unit sphere `S^{n−1} ⊂ ℝⁿ` with closed-form geometry throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    n: usize,
}

impl Sphere {
    pub fn new(n: usize) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&n) {
            return Err(Error::InvalidParameter { name: "n" });
        }
        Ok(Sphere { n })
    }
}

impl Manifold for Sphere {
    fn dim(&self) -> usize {
        self.n - 1
    }

    fn ambient_dim(&self) -> usize {
        self.n
    }

    fn name(&self) -> &str {
        "sphere"
    }

    fn residual(&self, x: &Vector) -> f64 {
        (x.norm() - 1.0).abs()
    }

    fn project_tangent(&self, x: &Vector, v: &Vector) -> Vector {
        v.axpy(-x.dot(v), x)
    }

    fn project_tangent_near(&self, y: &Vector, v: &Vector) -> Result<Vector> {
        let ny2 = y.norm_squared();
        if !(ny2 > 0.0) {
            return Err(Error::ProjectionDiverged { iterations: 0 });
        }
        Ok(v.axpy(-y.dot(v) / ny2, y))
    }

    fn nearest_point(&self, y: &Vector) -> Result<Vector> {
        let ny = y.norm();
        if !(ny > 0.0) || !ny.is_finite() {
            return Err(Error::ProjectionDiverged { iterations: 0 });
        }
        Ok(y.scale(1.0 / ny))
    }

    fn tubular_radius(&self) -> f64 {
        1.0
    }

    fn curvature_bounds(&self) -> Option<CurvatureBounds> {
        Some(CurvatureBounds { kappa1: 1.0, kappa2: Some(0.0) })
    }

    fn ricci_curvature(&self, _x: &Vector, u: &Vector) -> Option<f64> {
        Some((self.n as f64 - 2.0) * u.norm_squared())
    }

    fn projection_matrix(&self, x: &Vector) -> Matrix {
        Matrix::identity(self.n).sub(&x.outer(x))
    }

    fn second_fundamental_form(&self, x: &Vector, u: &Vector, v: &Vector) -> Vector {
        x.scale(-u.dot(v))
    }

    fn ito_correction(&self, x: &Vector) -> Vector {
        x.scale(-0.5 * (self.n as f64 - 1.0))
    }

    fn exp_map(&self, x: &Vector, v: &Vector, _cfg: &GeodesicIntegratorConfig) -> Result<Vector> {
        let nv = v.norm();
        if nv == 0.0 {
            return Ok(*x);
        }
        Ok(x.scale(nv.cos()).axpy(nv.sin() / nv, v))
    }
}
