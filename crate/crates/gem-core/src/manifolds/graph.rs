use alloc::boxed::Box;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::spot_check_derivatives;
use crate::error::{Error, Result};
use crate::geometry::{CurvatureBounds, Manifold, TangentBasis};
use crate::linalg::{gram_schmidt, Matrix, Vector, MAX_DIM};
use crate::rng;

/// A smooth map `f: ℝᵐ → ℝᵏ` with analytic first and second derivatives.
pub trait GraphMap: Send + Sync {
    fn base_dim(&self) -> usize;
    fn codim(&self) -> usize;
    fn value(&self, x: &Vector) -> Vector;
    /// `Df(x)`, `k × m`.
    fn jacobian(&self, x: &Vector) -> Matrix;
    /// `D²f(x)[u, v] ∈ ℝᵏ`.
    fn second_derivative(&self, x: &Vector, u: &Vector, v: &Vector) -> Vector;
}

/// Graph manifold parameters: the map and its declared sup-norms
/// `C1 = sup‖Df‖`, `C2 = sup‖D²f‖`.
pub struct GraphSpec {
    pub map: Box<dyn GraphMap>,
    pub c1: f64,
    pub c2: f64,
    pub curvature: Option<CurvatureBounds>,
}

/// The graph `{(x, f(x)) : x ∈ ℝᵐ} ⊂ ℝ^{m+k}`.
pub struct GraphManifold {
    spec: GraphSpec,
    m: usize,
    k: usize,
}

const NEWTON_MAX_ITER: usize = 100;

impl GraphManifold {
    /// Validates the derivative callbacks against finite differences at 8
    /// seeded random base points.
    pub fn new(spec: GraphSpec) -> Result<Self> {
        let m = spec.map.base_dim();
        let k = spec.map.codim();
        if m == 0 || k == 0 || m + k > MAX_DIM {
            return Err(Error::InvalidParameter { name: "dimension" });
        }
        if !(spec.c1 >= 0.0) || !(spec.c2 >= 0.0) {
            return Err(Error::InvalidParameter { name: "c1/c2" });
        }
        let mut r = rng::stream(0x6772_6170_6800);
        let points: Vec<Vector> = (0..8).map(|_| rng::gaussian_vector(&mut r, m)).collect();
        spot_check_derivatives(
            &points,
            |x| spec.map.value(x),
            |x| spec.map.jacobian(x),
            |x, u, v| spec.map.second_derivative(x, u, v),
        )?;
        Ok(GraphManifold { spec, m, k })
    }

    pub fn map(&self) -> &dyn GraphMap {
        self.spec.map.as_ref()
    }

    /// `1 / (C2 (1 + 2 C1²))`, or `+∞` for a flat graph.
    pub fn tubular_radius_bound(c1: f64, c2: f64) -> f64 {
        if c2 == 0.0 {
            f64::INFINITY
        } else {
            1.0 / (c2 * (1.0 + 2.0 * c1 * c1))
        }
    }

    fn split(&self, y: &Vector) -> (Vector, Vector) {
        let base = Vector::from_fn(self.m, |i| y[i]);
        let fiber = Vector::from_fn(self.k, |i| y[self.m + i]);
        (base, fiber)
    }

    fn lift(&self, base: &Vector) -> Vector {
        let f = self.spec.map.value(base);
        Vector::from_fn(self.m + self.k, |i| if i < self.m { base[i] } else { f[i - self.m] })
    }

    /// Orthonormalized `(eᵢ, ∂ᵢf(x))` at the base point of `y`.
    fn basis_at_base(&self, base: &Vector) -> TangentBasis {
        let n = self.m + self.k;
        let df = self.spec.map.jacobian(base);
        let mut cols = [Vector::zeros(n); MAX_DIM];
        for (i, col) in cols.iter_mut().enumerate().take(self.m) {
            *col = Vector::from_fn(n, |a| {
                if a < self.m {
                    if a == i {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    df[(a - self.m, i)]
                }
            });
        }
        let kept = gram_schmidt(&mut cols[..self.m], 0.0);
        debug_assert_eq!(kept, self.m);
        TangentBasis::new(&cols[..kept])
    }

    fn objective(&self, s: &Vector, u: &Vector, v: &Vector) -> f64 {
        0.5 * ((*s - *u).norm_squared() + (self.spec.map.value(s) - *v).norm_squared())
    }
}

impl Manifold for GraphManifold {
    fn dim(&self) -> usize {
        self.m
    }

    fn ambient_dim(&self) -> usize {
        self.m + self.k
    }

    fn name(&self) -> &str {
        "graph"
    }

    fn residual(&self, x: &Vector) -> f64 {
        let (base, fiber) = self.split(x);
        (fiber - self.spec.map.value(&base)).norm()
    }

    fn project_tangent(&self, x: &Vector, v: &Vector) -> Vector {
        let (base, _) = self.split(x);
        let basis = self.basis_at_base(&base);
        basis.as_slice().iter().fold(Vector::zeros(v.len()), |acc, e| acc.axpy(e.dot(v), e))
    }

    /// Extends `P` off the graph as constant along the fibres `x = const`.
    fn project_tangent_near(&self, y: &Vector, v: &Vector) -> Result<Vector> {
        Ok(self.project_tangent(y, v))
    }

    fn tangent_basis(&self, x: &Vector) -> TangentBasis {
        let (base, _) = self.split(x);
        self.basis_at_base(&base)
    }

    fn geodesic_acceleration(&self, y: &Vector, w: &Vector) -> Result<Vector> {
        let (base, _) = self.split(y);
        let x = self.lift(&base);
        let wt = self.project_tangent(&x, w);
        Ok(self.second_fundamental_form(&x, &wt, &wt))
    }

    /// Damped Newton on `φ(s) = ½(‖s − u‖² + ‖f(s) − v‖²)` for `y = (u, v)`.
    fn nearest_point(&self, y: &Vector) -> Result<Vector> {
        if !y.is_finite() {
            return Err(Error::ProjectionDiverged { iterations: 0 });
        }
        let (u, v) = self.split(y);
        let map = self.spec.map.as_ref();
        let mut s = u;
        let tol = 1e-13 * (1.0 + y.norm());
        for iter in 0..NEWTON_MAX_ITER {
            let f = map.value(&s);
            let df = map.jacobian(&s);
            let resid = f - v;
            let grad = (s - u) + df.tr_mul_vec(&resid);
            if grad.norm() <= tol {
                return Ok(self.lift(&s));
            }
            let mut hess = Matrix::identity(self.m).add(&df.transpose().mul(&df));
            for a in 0..self.m {
                for b in a..self.m {
                    let d2 = map.second_derivative(&s, &Vector::basis(self.m, a), &Vector::basis(self.m, b));
                    let c = d2.dot(&resid);
                    hess[(a, b)] += c;
                    if a != b {
                        hess[(b, a)] += c;
                    }
                }
            }
            let newton = hess.solve(&(-grad)).filter(|d| d.dot(&grad) < 0.0);
            let scale = 1.0 + s.norm();
            if let Some(d) = newton {
                if d.norm() <= 1e-6 * scale {
                    // Quadratic convergence region: full steps, no line search.
                    s += d;
                    if d.norm() <= 1e-12 * scale {
                        return Ok(self.lift(&s));
                    }
                    continue;
                }
            }
            let mut step = newton.unwrap_or(-grad);
            let phi0 = self.objective(&s, &u, &v);
            let slope = step.dot(&grad);
            let mut accepted = false;
            for _ in 0..40 {
                let trial = s + step;
                if self.objective(&trial, &u, &v) <= phi0 + 1e-4 * slope {
                    s = trial;
                    accepted = true;
                    break;
                }
                step = step.scale(0.5);
            }
            if !accepted {
                // No further decrease possible in floating point.
                if grad.norm() <= 1e3 * tol {
                    return Ok(self.lift(&s));
                }
                return Err(Error::ProjectionDiverged { iterations: iter + 1 });
            }
            if step.norm() <= 1e-15 * (1.0 + s.norm()) {
                return Ok(self.lift(&s));
            }
        }
        Err(Error::ProjectionDiverged { iterations: NEWTON_MAX_ITER })
    }

    fn tubular_radius(&self) -> f64 {
        Self::tubular_radius_bound(self.spec.c1, self.spec.c2)
    }

    fn curvature_bounds(&self) -> Option<CurvatureBounds> {
        self.spec.curvature
    }
}

/// `f(x) = a‖x‖²` over `ℝᵐ`. The declared bounds `C1 = C2 = 2a` hold on the
/// unit ball of the base, which is the working region for this family.
#[derive(Debug, Clone, Copy)]
pub struct Paraboloid {
    pub m: usize,
    pub a: f64,
}

impl GraphMap for Paraboloid {
    fn base_dim(&self) -> usize {
        self.m
    }
    fn codim(&self) -> usize {
        1
    }
    fn value(&self, x: &Vector) -> Vector {
        Vector::from_slice(&[self.a * x.norm_squared()])
    }
    fn jacobian(&self, x: &Vector) -> Matrix {
        Matrix::from_fn(1, self.m, |_, j| 2.0 * self.a * x[j])
    }
    fn second_derivative(&self, _x: &Vector, u: &Vector, v: &Vector) -> Vector {
        Vector::from_slice(&[2.0 * self.a * u.dot(v)])
    }
}

impl Paraboloid {
    pub fn spec(self) -> GraphSpec {
        let c = 2.0 * self.a.abs();
        GraphSpec { map: Box::new(self), c1: c, c2: c, curvature: None }
    }
}

/// `f(x) = sin(x)` over `ℝ`, with `C1 = C2 = 1`.
#[derive(Debug, Clone, Copy)]
pub struct SineGraph;

impl GraphMap for SineGraph {
    fn base_dim(&self) -> usize {
        1
    }
    fn codim(&self) -> usize {
        1
    }
    fn value(&self, x: &Vector) -> Vector {
        Vector::from_slice(&[x[0].sin()])
    }
    fn jacobian(&self, x: &Vector) -> Matrix {
        Matrix::from_fn(1, 1, |_, _| x[0].cos())
    }
    fn second_derivative(&self, x: &Vector, u: &Vector, v: &Vector) -> Vector {
        Vector::from_slice(&[-x[0].sin() * u[0] * v[0]])
    }
}

impl SineGraph {
    pub fn spec(self) -> GraphSpec {
        GraphSpec { map: Box::new(self), c1: 1.0, c2: 1.0, curvature: None }
    }
}

/// `f ≡ 0`: the flat subspace `ℝᵐ × {0}`.
#[derive(Debug, Clone, Copy)]
pub struct FlatGraph {
    pub m: usize,
    pub k: usize,
}

impl GraphMap for FlatGraph {
    fn base_dim(&self) -> usize {
        self.m
    }
    fn codim(&self) -> usize {
        self.k
    }
    fn value(&self, _x: &Vector) -> Vector {
        Vector::zeros(self.k)
    }
    fn jacobian(&self, _x: &Vector) -> Matrix {
        Matrix::zeros(self.k, self.m)
    }
    fn second_derivative(&self, _x: &Vector, _u: &Vector, _v: &Vector) -> Vector {
        Vector::zeros(self.k)
    }
}

impl FlatGraph {
    pub fn spec(self) -> GraphSpec {
        GraphSpec {
            map: Box::new(self),
            c1: 0.0,
            c2: 0.0,
            curvature: Some(CurvatureBounds { kappa1: 0.0, kappa2: Some(0.0) }),
        }
    }
}
