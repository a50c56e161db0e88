//! Concrete manifold families: the unit sphere, graphs of smooth maps, and
//! regular level sets.

mod graph;
mod level_set;
mod sphere;

pub use graph::{FlatGraph, GraphManifold, GraphMap, GraphSpec, Paraboloid, SineGraph};
pub use level_set::{Constraint, LevelSet, LevelSetSpec, SphereConstraint, TorusConstraint};
pub use sphere::Sphere;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Compares analytic first and second derivatives of a map against central
/// differences at `points`; relative error must stay below `1e-4`.
pub(crate) fn spot_check_derivatives(
    points: &[Vector],
    value: impl Fn(&Vector) -> Vector,
    jacobian: impl Fn(&Vector) -> Matrix,
    second: impl Fn(&Vector, &Vector, &Vector) -> Vector,
) -> Result<()> {
    const TOL: f64 = 1e-4;
    for x in points {
        let d = x.len();
        let eps = crate::geometry::fd_step(x);
        let jac = jacobian(x);
        let mut worst: f64 = 0.0;
        for j in 0..d {
            let e = Vector::basis(d, j);
            let fd = (value(&x.axpy(eps, &e)) - value(&x.axpy(-eps, &e))).scale(0.5 / eps);
            let col = jac.column(j);
            worst = worst.max((fd - col).norm() / col.norm().max(1.0));
            let jp = jacobian(&x.axpy(eps, &e));
            let jm = jacobian(&x.axpy(-eps, &e));
            for a in 0..d {
                let ea = Vector::basis(d, a);
                let fd2 = (jp.mul_vec(&ea) - jm.mul_vec(&ea)).scale(0.5 / eps);
                let an = second(x, &ea, &e);
                worst = worst.max((fd2 - an).norm() / an.norm().max(1.0));
            }
        }
        if !(worst <= TOL) {
            return Err(Error::DerivativeMismatch { relative_error: worst });
        }
    }
    Ok(())
}
