use alloc::boxed::Box;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::spot_check_derivatives;
use crate::error::{Error, Result};
use crate::geometry::{CurvatureBounds, Manifold, TangentBasis};
use crate::linalg::{Matrix, Vector, MAX_DIM};
use crate::rng;

/// A constraint map `F: ℝⁿ → ℝᵏ` with analytic `DF` and `D²F`.
pub trait Constraint: Send + Sync {
    fn ambient_dim(&self) -> usize;
    fn codim(&self) -> usize;
    fn value(&self, y: &Vector) -> Vector;
    /// `DF(y)`, `k × n`.
    fn jacobian(&self, y: &Vector) -> Matrix;
    /// `D²F(y)[u, v] ∈ ℝᵏ`.
    fn second_derivative(&self, y: &Vector, u: &Vector, v: &Vector) -> Vector;
}

/// Level-set parameters. `c0` is a declared lower bound on `σ_min(DF)` over
/// `M`, `c2` a declared bound on `‖D²F‖`; `anchor` is any point on `M`, used
/// to seed construction-time validation.
pub struct LevelSetSpec {
    pub constraint: Box<dyn Constraint>,
    pub c0: f64,
    pub c2: f64,
    pub anchor: Vector,
    pub curvature: Option<CurvatureBounds>,
    pub label: &'static str,
}

/// The regular level set `M = F⁻¹(0)`.
pub struct LevelSet {
    spec: LevelSetSpec,
    n: usize,
    k: usize,
}

const PROJECTION_MAX_ITER: usize = 100;

/// `DF` at a point together with the factorization needed for `G† = Gᵀ(GGᵀ)⁻¹`.
struct Frame {
    g: Matrix,
    gram: Matrix,
}

impl Frame {
    /// `G† r`
    fn pinv(&self, r: &Vector) -> Option<Vector> {
        self.gram.solve(r).map(|w| self.g.tr_mul_vec(&w))
    }

    /// `(I − G†G) v`
    fn tangent(&self, v: &Vector) -> Vector {
        match self.pinv(&self.g.mul_vec(v)) {
            Some(nv) => *v - nv,
            None => Vector::from_fn(v.len(), |_| f64::NAN),
        }
    }
}

impl LevelSet {
    pub fn new(spec: LevelSetSpec) -> Result<Self> {
        let n = spec.constraint.ambient_dim();
        let k = spec.constraint.codim();
        if k == 0 || k >= n || n > MAX_DIM {
            return Err(Error::InvalidParameter { name: "dimension" });
        }
        if !(spec.c0 > 0.0) || !(spec.c2 > 0.0) {
            return Err(Error::InvalidParameter { name: "c0/c2" });
        }
        if spec.anchor.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: spec.anchor.len() });
        }
        let mut r = rng::stream(0x6c65_7665_6c00);
        let spread = 0.5 * spec.c0 / spec.c2;
        let probes: Vec<Vector> = (0..8).map(|_| spec.anchor + rng::gaussian_vector(&mut r, n).scale(spread)).collect();
        spot_check_derivatives(
            &probes,
            |y| spec.constraint.value(y),
            |y| spec.constraint.jacobian(y),
            |y, u, v| spec.constraint.second_derivative(y, u, v),
        )?;
        let ls = LevelSet { spec, n, k };
        let tol = crate::geometry::membership_tolerance(&ls.spec.anchor);
        if ls.residual(&ls.spec.anchor) > tol {
            return Err(Error::OffManifold { residual: ls.residual(&ls.spec.anchor), tolerance: tol });
        }
        // Rank validation at on-manifold points near the anchor.
        let reach = 0.25 * ls.tubular_radius();
        for _ in 0..8 {
            let y = ls.spec.anchor + rng::gaussian_vector(&mut r, n).scale(reach / (n as f64).sqrt());
            let x = ls.nearest_point(&y)?;
            ls.check_rank(&x)?;
        }
        Ok(ls)
    }

    pub fn constraint(&self) -> &dyn Constraint {
        self.spec.constraint.as_ref()
    }

    pub fn codim(&self) -> usize {
        self.k
    }

    /// Fails when `σ_min(DF(x)) < c0/2`.
    pub fn check_rank(&self, x: &Vector) -> Result<()> {
        let sigma_min = self.spec.constraint.jacobian(x).min_singular_value();
        let bound = 0.5 * self.spec.c0;
        if !(sigma_min >= bound) {
            return Err(Error::RankDeficient { sigma_min, bound });
        }
        Ok(())
    }

    fn frame(&self, y: &Vector) -> Frame {
        let g = self.spec.constraint.jacobian(y);
        let gram = g.mul(&g.transpose());
        Frame { g, gram }
    }

    /// `II_x(u, v) = −G† D²F[u, v]`.
    fn second_form_with(&self, frame: &Frame, x: &Vector, u: &Vector, v: &Vector) -> Vector {
        let d2 = self.spec.constraint.second_derivative(x, u, v);
        match frame.pinv(&d2) {
            Some(w) => -w,
            None => Vector::from_fn(self.n, |_| f64::NAN),
        }
    }

    /// One Newton step for the tangential optimality condition
    /// `P(x)(y − x) = 0`, using `(I − S_{x,ξ})` on `T_xM` with `ξ` the normal
    /// part of `y − x`. Falls back to the plain tangential pull when that
    /// operator is not positive definite.
    fn tangential_pull(&self, frame: &Frame, x: &Vector, y: &Vector) -> Vector {
        let d = *y - *x;
        let plain = frame.tangent(&d);
        let xi = d - plain;
        let basis = self.basis_from_frame(frame);
        let e = basis.as_slice();
        let m = e.len();
        let mut a = Matrix::identity(m);
        for i in 0..m {
            for j in i..m {
                let s = self.second_form_with(frame, x, &e[i], &e[j]).dot(&xi);
                a[(i, j)] -= s;
                if i != j {
                    a[(j, i)] -= s;
                }
            }
        }
        let rhs = Vector::from_fn(m, |i| e[i].dot(&d));
        if a.symmetric_eigenvalues()[0] > 1e-3 {
            if let Some(c) = a.solve(&rhs) {
                return e.iter().enumerate().fold(Vector::zeros(self.n), |acc, (i, ei)| acc.axpy(c[i], ei));
            }
        }
        plain
    }

    fn basis_from_frame(&self, frame: &Frame) -> TangentBasis {
        let q = frame.g.transpose().householder_q();
        let mut cols = [Vector::zeros(self.n); MAX_DIM];
        for (j, col) in cols.iter_mut().enumerate().take(self.n - self.k) {
            *col = q.column(self.k + j);
        }
        TangentBasis::new(&cols[..self.n - self.k])
    }
}

impl Manifold for LevelSet {
    fn dim(&self) -> usize {
        self.n - self.k
    }

    fn ambient_dim(&self) -> usize {
        self.n
    }

    fn name(&self) -> &str {
        self.spec.label
    }

    /// Length of the Gauss–Newton correction `‖G† F(x)‖`.
    fn residual(&self, x: &Vector) -> f64 {
        let f = self.spec.constraint.value(x);
        match self.frame(x).pinv(&f) {
            Some(s) => s.norm(),
            None => f64::INFINITY,
        }
    }

    fn project_tangent(&self, x: &Vector, v: &Vector) -> Vector {
        self.frame(x).tangent(v)
    }

    /// `I − G(y)†G(y)` is smooth wherever `DF` has full rank.
    fn project_tangent_near(&self, y: &Vector, v: &Vector) -> Result<Vector> {
        let t = self.frame(y).tangent(v);
        if t.is_finite() {
            Ok(t)
        } else {
            Err(Error::RankDeficient { sigma_min: 0.0, bound: 0.5 * self.spec.c0 })
        }
    }

    fn tangent_basis(&self, x: &Vector) -> TangentBasis {
        self.basis_from_frame(&self.frame(x))
    }

    fn projection_matrix(&self, x: &Vector) -> Matrix {
        let frame = self.frame(x);
        let mut p = Matrix::identity(self.n);
        for a in 0..self.n {
            let col = frame.tangent(&Vector::basis(self.n, a));
            for i in 0..self.n {
                p[(i, a)] = col[i];
            }
        }
        // Symmetrize away round-off.
        Matrix::from_fn(self.n, self.n, |i, j| 0.5 * (p[(i, j)] + p[(j, i)]))
    }

    fn second_fundamental_form(&self, x: &Vector, u: &Vector, v: &Vector) -> Vector {
        self.second_form_with(&self.frame(x), x, u, v)
    }

    /// `A(x) = −½ G† Σᵢ D²F[Eᵢ, Eᵢ]`.
    fn ito_correction(&self, x: &Vector) -> Vector {
        let frame = self.frame(x);
        let basis = self.basis_from_frame(&frame);
        let mut acc = Vector::zeros(self.k);
        for e in basis.as_slice() {
            acc += self.spec.constraint.second_derivative(x, e, e);
        }
        match frame.pinv(&acc) {
            Some(w) => w.scale(-0.5),
            None => Vector::from_fn(self.n, |_| f64::NAN),
        }
    }

    /// Differentiating `F(γ) = 0` twice gives `γ″ = −G† D²F[γ′, γ′]` exactly
    /// along curves on `M`; the same formula is a smooth extension off `M`.
    fn geodesic_acceleration(&self, y: &Vector, w: &Vector) -> Result<Vector> {
        let a = self.second_form_with(&self.frame(y), y, w, w);
        if a.is_finite() {
            Ok(a)
        } else {
            Err(Error::RankDeficient { sigma_min: 0.0, bound: 0.5 * self.spec.c0 })
        }
    }

    /// Alternates a Gauss–Newton root step `x ← x − G†F(x)` with a tangential
    /// pull towards `y` until both corrections are negligible.
    fn nearest_point(&self, y: &Vector) -> Result<Vector> {
        if !y.is_finite() {
            return Err(Error::ProjectionDiverged { iterations: 0 });
        }
        let tol = 1e-12 * (1.0 + y.norm());
        let mut x = *y;
        for iter in 0..PROJECTION_MAX_ITER {
            let frame = self.frame(&x);
            let f = self.spec.constraint.value(&x);
            let root = frame.pinv(&f).ok_or(Error::ProjectionDiverged { iterations: iter })?;
            x -= root;
            let frame = self.frame(&x);
            let pull = self.tangential_pull(&frame, &x, y);
            x += pull;
            if !x.is_finite() {
                return Err(Error::ProjectionDiverged { iterations: iter + 1 });
            }
            if root.norm() <= tol && pull.norm() <= tol {
                // Final root step so the returned point is on M to round-off.
                let f = self.spec.constraint.value(&x);
                if let Some(s) = self.frame(&x).pinv(&f) {
                    x -= s;
                }
                self.check_rank(&x)?;
                return Ok(x);
            }
        }
        Err(Error::ProjectionDiverged { iterations: PROJECTION_MAX_ITER })
    }

    /// `c0 / C2`.
    fn tubular_radius(&self) -> f64 {
        self.spec.c0 / self.spec.c2
    }

    fn curvature_bounds(&self) -> Option<CurvatureBounds> {
        self.spec.curvature
    }
}

/// `F(y) = ‖y‖² − 1`.
#[derive(Debug, Clone, Copy)]
pub struct SphereConstraint {
    pub n: usize,
}

impl Constraint for SphereConstraint {
    fn ambient_dim(&self) -> usize {
        self.n
    }
    fn codim(&self) -> usize {
        1
    }
    fn value(&self, y: &Vector) -> Vector {
        Vector::from_slice(&[y.norm_squared() - 1.0])
    }
    fn jacobian(&self, y: &Vector) -> Matrix {
        Matrix::from_fn(1, self.n, |_, j| 2.0 * y[j])
    }
    fn second_derivative(&self, _y: &Vector, u: &Vector, v: &Vector) -> Vector {
        Vector::from_slice(&[2.0 * u.dot(v)])
    }
}

/// `F(x, y, z) = (√(x² + y²) − R)² + z² − r²`, the torus of revolution about
/// the z-axis.
#[derive(Debug, Clone, Copy)]
pub struct TorusConstraint {
    pub major: f64,
    pub minor: f64,
}

impl Constraint for TorusConstraint {
    fn ambient_dim(&self) -> usize {
        3
    }
    fn codim(&self) -> usize {
        1
    }
    fn value(&self, p: &Vector) -> Vector {
        let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
        Vector::from_slice(&[(rho - self.major).powi(2) + p[2] * p[2] - self.minor * self.minor])
    }
    fn jacobian(&self, p: &Vector) -> Matrix {
        let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
        let c = 2.0 * (rho - self.major) / rho;
        Matrix::from_rows(&[Vector::from_slice(&[c * p[0], c * p[1], 2.0 * p[2]])])
    }
    /// Hessian `2I − 2R (I₂ − ρ̂ρ̂ᵀ)/ρ` in the xy-block, `2` for z.
    fn second_derivative(&self, p: &Vector, u: &Vector, v: &Vector) -> Vector {
        let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
        let (cx, cy) = (p[0] / rho, p[1] / rho);
        let uv_xy = u[0] * v[0] + u[1] * v[1];
        let ur = u[0] * cx + u[1] * cy;
        let vr = v[0] * cx + v[1] * cy;
        let planar = 2.0 * uv_xy - 2.0 * self.major / rho * (uv_xy - ur * vr);
        Vector::from_slice(&[planar + 2.0 * u[2] * v[2]])
    }
}

impl LevelSet {
    /// The unit circle `x² + y² = 1`.
    pub fn circle() -> Self {
        Self::sphere(2).expect("circle is a valid level set")
    }

    /// `S^{n−1}` as the level set `‖y‖² = 1`.
    pub fn sphere(n: usize) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&n) {
            return Err(Error::InvalidParameter { name: "n" });
        }
        LevelSet::new(LevelSetSpec {
            constraint: Box::new(SphereConstraint { n }),
            c0: 2.0,
            c2: 2.0,
            anchor: Vector::basis(n, 0),
            curvature: Some(CurvatureBounds { kappa1: 1.0, kappa2: Some(0.0) }),
            label: if n == 2 { "circle" } else { "levelset-sphere" },
        })
    }

    /// Torus with major radius `R` and minor radius `r < R`. On the torus
    /// `‖DF‖ = 2r` and `‖D²F‖ ≤ 2` in the tube, so the declared radius is `r`.
    pub fn torus(major: f64, minor: f64) -> Result<Self> {
        if !(minor > 0.0 && major > 2.0 * minor) {
            return Err(Error::InvalidParameter { name: "torus radii" });
        }
        LevelSet::new(LevelSetSpec {
            constraint: Box::new(TorusConstraint { major, minor }),
            c0: 2.0 * minor,
            c2: 2.0,
            anchor: Vector::from_slice(&[major + minor, 0.0, 0.0]),
            curvature: Some(CurvatureBounds { kappa1: 1.0 / minor, kappa2: None }),
            label: "torus",
        })
    }
}
