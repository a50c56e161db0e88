//! Embedded-submanifold geometry.
//!
//! A manifold `M ⊂ ℝⁿ` is described by the [`Manifold`] trait: membership,
//! the tangent projector `P(x)`, the nearest-point projection `π`, and a set of
//! derived operations (second fundamental form, Itô correction, exponential
//! map) that have generic numerical fallbacks and may be overridden by closed
//! forms. The free functions in this module are the checked entry points: they
//! validate membership and tangency before delegating to the trait.

mod extension;
pub mod generic;

pub use extension::{bump_value, cutoff, extend_field, extension_weight, radial_clamp, smooth_step, Extension};

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector, MAX_DIM};

/// Relative tolerance for tangency and normality checks.
pub const TOL_TANGENT: f64 = 1e-8;

/// Membership tolerance `1e-9·(1 + ‖x‖)`.
#[inline]
pub fn membership_tolerance(x: &Vector) -> f64 {
    1e-9 * (1.0 + x.norm())
}

/// Finite-difference step `1e-5·max(1, ‖x‖)`.
#[inline]
pub fn fd_step(x: &Vector) -> f64 {
    1e-5 * x.norm().max(1.0)
}

/// Declared extrinsic curvature bounds: `kappa1 = sup‖II‖`, `kappa2 = sup‖∇II‖`.
/// `kappa2` is often unknown; checks that need it are skipped when absent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureBounds {
    pub kappa1: f64,
    pub kappa2: Option<f64>,
}

/// Settings for the generic geodesic integrator behind [`exp_map`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicIntegratorConfig {
    /// RK4 substeps per unit of arclength (at least 4).
    pub substeps_per_unit: u32,
    /// Re-project position and velocity onto `M`/`TM` after every substep.
    pub reproject: bool,
    /// Largest residual accepted for the end point when `reproject` is off.
    pub tolerance: f64,
}

impl GeodesicIntegratorConfig {
    pub fn new(substeps_per_unit: u32, reproject: bool, tolerance: f64) -> Result<Self> {
        if substeps_per_unit < 4 {
            return Err(Error::InvalidParameter { name: "substeps_per_unit" });
        }
        if !(tolerance > 0.0) {
            return Err(Error::InvalidParameter { name: "tolerance" });
        }
        Ok(GeodesicIntegratorConfig { substeps_per_unit, reproject, tolerance })
    }
}

impl Default for GeodesicIntegratorConfig {
    fn default() -> Self {
        GeodesicIntegratorConfig { substeps_per_unit: 64, reproject: true, tolerance: 1e-6 }
    }
}

/// An orthonormal basis of a tangent space, stored inline.
#[derive(Clone, Copy)]
pub struct TangentBasis {
    len: usize,
    vectors: [Vector; MAX_DIM],
}

impl TangentBasis {
    pub fn new(vectors: &[Vector]) -> Self {
        let mut out = TangentBasis { len: vectors.len(), vectors: [Vector::zeros(0); MAX_DIM] };
        out.vectors[..vectors.len()].copy_from_slice(vectors);
        out
    }

    pub fn as_slice(&self) -> &[Vector] {
        &self.vectors[..self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `Σ Eᵢ Eᵢᵀ`
    pub fn projector(&self, n: usize) -> Matrix {
        let mut p = Matrix::zeros(n, n);
        for e in self.as_slice() {
            for i in 0..n {
                for j in 0..n {
                    p[(i, j)] += e[i] * e[j];
                }
            }
        }
        p
    }
}

/// The operation set of an embedded `m`-dimensional submanifold of `ℝⁿ`.
///
/// Implementors supply membership, the tangent projector, and the
/// nearest-point projection. Everything else has a generic fallback built on
/// those three; closed forms should override where they exist. Unchecked:
/// callers are expected to pass on-manifold points and tangent vectors (the
/// checked wrappers live at module level).
pub trait Manifold: Send + Sync {
    /// Intrinsic dimension `m`.
    fn dim(&self) -> usize;

    /// Ambient dimension `n`.
    fn ambient_dim(&self) -> usize;

    fn name(&self) -> &str;

    /// A distance-like membership residual; zero exactly on `M`.
    fn residual(&self, x: &Vector) -> f64;

    /// `P(x) v` for `x` on `M`.
    fn project_tangent(&self, x: &Vector, v: &Vector) -> Vector;

    /// `π(y)`, the nearest point of `M` to `y` inside the tubular neighbourhood.
    fn nearest_point(&self, y: &Vector) -> Result<Vector>;

    /// Radius of a uniform tubular neighbourhood that the family guarantees.
    fn tubular_radius(&self) -> f64;

    fn curvature_bounds(&self) -> Option<CurvatureBounds> {
        None
    }

    /// `Ric_x(u, u)` for unit tangent `u`, when known in closed form.
    fn ricci_curvature(&self, _x: &Vector, _u: &Vector) -> Option<f64> {
        None
    }

    /// A smooth extension of `P` to a neighbourhood of `M`, applied to `v`.
    /// Used for differentiating `P`. Defaults to `P(π(y)) v`.
    fn project_tangent_near(&self, y: &Vector, v: &Vector) -> Result<Vector> {
        let x = self.nearest_point(y)?;
        Ok(self.project_tangent(&x, v))
    }

    fn tangent_basis(&self, x: &Vector) -> TangentBasis {
        generic::tangent_basis_from_projector(self, x)
    }

    fn projection_matrix(&self, x: &Vector) -> Matrix {
        self.tangent_basis(x).projector(self.ambient_dim())
    }

    /// `II_x(u, v)`.
    fn second_fundamental_form(&self, x: &Vector, u: &Vector, v: &Vector) -> Vector {
        generic::second_fundamental_form_fd(self, x, u, v)
    }

    /// `A(x) = ½ Σᵢ II_x(Eᵢ, Eᵢ)`.
    fn ito_correction(&self, x: &Vector) -> Vector {
        generic::ito_correction_from_basis(self, x)
    }

    /// Right-hand side of the ambient geodesic equation `γ″ = II(γ′, γ′)`,
    /// extended to points `y` near `M`.
    fn geodesic_acceleration(&self, y: &Vector, w: &Vector) -> Result<Vector> {
        let x = self.nearest_point(y)?;
        let wt = self.project_tangent(&x, w);
        Ok(self.second_fundamental_form(&x, &wt, &wt))
    }

    fn exp_map(&self, x: &Vector, v: &Vector, cfg: &GeodesicIntegratorConfig) -> Result<Vector> {
        generic::exp_geodesic(self, x, v, cfg)
    }
}

/// A checked tangent projector.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionOperator(Matrix);

impl ProjectionOperator {
    pub fn new(matrix: Matrix) -> Self {
        ProjectionOperator(matrix)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        self.0.mul_vec(v)
    }

    /// `‖P − Pᵀ‖_F`
    pub fn symmetry_defect(&self) -> f64 {
        self.0.sub(&self.0.transpose()).frobenius_norm()
    }

    /// `‖P² − P‖_F`
    pub fn idempotency_defect(&self) -> f64 {
        self.0.mul(&self.0).sub(&self.0).frobenius_norm()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }
}

pub fn check_dimension(m: &(impl Manifold + ?Sized), v: &Vector) -> Result<()> {
    if v.len() != m.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: m.ambient_dim(), got: v.len() });
    }
    if !v.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Fails unless `x` lies on `M` within [`membership_tolerance`].
pub fn check_on_manifold(m: &(impl Manifold + ?Sized), x: &Vector) -> Result<()> {
    check_dimension(m, x)?;
    let residual = m.residual(x);
    let tolerance = membership_tolerance(x);
    if !(residual <= tolerance) {
        return Err(Error::OffManifold { residual, tolerance });
    }
    Ok(())
}

/// Fails unless `v` is tangent at `x`: `‖P v − v‖ ≤ TOL_TANGENT·max(1, ‖v‖)`.
pub fn check_tangent(m: &(impl Manifold + ?Sized), x: &Vector, v: &Vector) -> Result<()> {
    check_dimension(m, v)?;
    let normal = (m.project_tangent(x, v) - *v).norm();
    let tolerance = TOL_TANGENT * v.norm().max(1.0);
    if normal > tolerance {
        return Err(Error::NotTangent { normal, tolerance });
    }
    Ok(())
}

/// Fails unless `xi` is normal at `x`: `‖P ξ‖ ≤ TOL_TANGENT·max(1, ‖ξ‖)`.
pub fn check_normal(m: &(impl Manifold + ?Sized), x: &Vector, xi: &Vector) -> Result<()> {
    check_dimension(m, xi)?;
    let tangent = m.project_tangent(x, xi).norm();
    let tolerance = TOL_TANGENT * xi.norm().max(1.0);
    if tangent > tolerance {
        return Err(Error::NotNormal { tangent, tolerance });
    }
    Ok(())
}

pub fn tangent_projection(m: &(impl Manifold + ?Sized), x: &Vector) -> Result<ProjectionOperator> {
    check_on_manifold(m, x)?;
    Ok(ProjectionOperator(m.projection_matrix(x)))
}

pub fn second_fundamental_form(m: &(impl Manifold + ?Sized), x: &Vector, u: &Vector, v: &Vector) -> Result<Vector> {
    check_on_manifold(m, x)?;
    check_tangent(m, x, u)?;
    check_tangent(m, x, v)?;
    Ok(m.second_fundamental_form(x, u, v))
}

pub fn ito_correction(m: &(impl Manifold + ?Sized), x: &Vector) -> Result<Vector> {
    check_on_manifold(m, x)?;
    Ok(m.ito_correction(x))
}

pub fn exp_map(m: &(impl Manifold + ?Sized), x: &Vector, v: &Vector, cfg: &GeodesicIntegratorConfig) -> Result<Vector> {
    check_on_manifold(m, x)?;
    check_tangent(m, x, v)?;
    m.exp_map(x, v, cfg)
}

pub fn nearest_point_projection(m: &(impl Manifold + ?Sized), y: &Vector) -> Result<Vector> {
    check_dimension(m, y)?;
    m.nearest_point(y)
}

/// The shape operator `S_{x,ξ}` as an `n × n` matrix acting on `T_xM` and
/// vanishing on `N_xM`, defined by `⟨S u, v⟩ = ⟨II_x(u, v), ξ⟩`.
pub fn shape_operator(m: &(impl Manifold + ?Sized), x: &Vector, xi: &Vector) -> Result<Matrix> {
    check_on_manifold(m, x)?;
    check_normal(m, x, xi)?;
    let n = m.ambient_dim();
    let basis = m.tangent_basis(x);
    let e = basis.as_slice();
    let mut s = Matrix::zeros(n, n);
    for i in 0..e.len() {
        for j in i..e.len() {
            let c = m.second_fundamental_form(x, &e[i], &e[j]).dot(xi);
            for a in 0..n {
                for b in 0..n {
                    let term = if i == j { c * e[i][a] * e[j][b] } else { c * (e[i][a] * e[j][b] + e[j][a] * e[i][b]) };
                    s[(a, b)] += term;
                }
            }
        }
    }
    Ok(s)
}

/// `P(x) ξ` with `ξ ~ N(0, Iₙ)` drawn from `rng`.
pub fn tangent_gaussian<R: Rng + ?Sized>(m: &(impl Manifold + ?Sized), x: &Vector, rng: &mut R) -> Result<Vector> {
    check_on_manifold(m, x)?;
    let xi = crate::rng::gaussian_vector(rng, m.ambient_dim());
    Ok(m.project_tangent(x, &xi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::{LevelSet, Sphere};
    use crate::rng;

    #[test]
    fn off_manifold_point_is_rejected() {
        let s = Sphere::new(3).unwrap();
        let err = tangent_projection(&s, &Vector::from_slice(&[1.1, 0.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::OffManifold { .. }));
        let err = tangent_projection(&s, &Vector::from_slice(&[1.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 3, got: 2 }));
    }

    #[test]
    fn non_tangent_input_to_second_fundamental_form_is_rejected() {
        let s = Sphere::new(3).unwrap();
        let x = Vector::from_slice(&[0.0, 0.0, 1.0]);
        let err = second_fundamental_form(&s, &x, &x, &Vector::from_slice(&[1.0, 0.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::NotTangent { .. }));
    }

    #[test]
    fn shape_operator_of_sphere_is_minus_identity_on_tangent_space() {
        let s = Sphere::new(3).unwrap();
        let x = Vector::from_slice(&[0.0, 0.0, 1.0]);
        let sh = shape_operator(&s, &x, &x).unwrap();
        let expected = Matrix::from_fn(3, 3, |i, j| if i == j && i < 2 { -1.0 } else { 0.0 });
        assert!(sh.sub(&expected).frobenius_norm() < 1e-8);
        let zero = shape_operator(&s, &x, &Vector::zeros(3)).unwrap();
        assert_eq!(zero.frobenius_norm(), 0.0);
    }

    #[test]
    fn shape_operator_rejects_tangent_direction() {
        let s = Sphere::new(3).unwrap();
        let x = Vector::from_slice(&[0.0, 0.0, 1.0]);
        assert!(shape_operator(&s, &x, &Vector::from_slice(&[1.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn tangent_gaussian_is_tangent_and_deterministic() {
        let c = LevelSet::circle();
        let x = Vector::from_slice(&[0.6, 0.8]);
        let a = tangent_gaussian(&c, &x, &mut rng::stream(7)).unwrap();
        let b = tangent_gaussian(&c, &x, &mut rng::stream(7)).unwrap();
        assert_eq!(a, b);
        assert!((c.project_tangent(&x, &a) - a).norm() <= 1e-12);
    }

    #[test]
    fn tangent_gaussian_covariance_matches_projector() {
        // Entrywise 3·SE Monte Carlo check of Cov = P(x).
        let s = Sphere::new(3).unwrap();
        let x = Vector::from_slice(&[0.6, 0.0, 0.8]);
        let p = s.projection_matrix(&x);
        let n = 100_000;
        let mut r = rng::stream(11);
        let mut sum = Matrix::zeros(3, 3);
        let mut sum_sq = Matrix::zeros(3, 3);
        for _ in 0..n {
            let g = tangent_gaussian(&s, &x, &mut r).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let v = g[i] * g[j];
                    sum[(i, j)] += v;
                    sum_sq[(i, j)] += v * v;
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let mean = sum[(i, j)] / n as f64;
                let var = sum_sq[(i, j)] / n as f64 - mean * mean;
                let se = (var / n as f64).sqrt();
                assert!((mean - p[(i, j)]).abs() <= 3.0 * se + 1e-12, "({i},{j}) {mean} vs {}", p[(i, j)]);
            }
        }
    }

    #[test]
    fn integrator_config_rejects_too_few_substeps() {
        assert!(GeodesicIntegratorConfig::new(3, true, 1e-6).is_err());
        assert!(GeodesicIntegratorConfig::new(4, true, 1e-6).is_ok());
    }
}
