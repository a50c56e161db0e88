//! Generic fallbacks built only on `P`, `π` and membership.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{fd_step, GeodesicIntegratorConfig, Manifold, TangentBasis};
use crate::error::{Error, Result};
use crate::linalg::{gram_schmidt, Vector, MAX_DIM};

/// Orthonormal tangent basis from the columns of `P(x)`, taken in order of
/// decreasing diagonal weight and orthonormalized.
pub fn tangent_basis_from_projector<M: Manifold + ?Sized>(m: &M, x: &Vector) -> TangentBasis {
    let n = m.ambient_dim();
    let mut cols = [Vector::zeros(n); MAX_DIM];
    for (a, col) in cols.iter_mut().enumerate().take(n) {
        *col = m.project_tangent(x, &Vector::basis(n, a));
    }
    let cols = &mut cols[..n];
    cols.sort_unstable_by(|a, b| b.norm_squared().partial_cmp(&a.norm_squared()).unwrap_or(core::cmp::Ordering::Equal));
    let kept = gram_schmidt(cols, 1e-8);
    TangentBasis::new(&cols[..kept.min(m.dim())])
}

/// `II_x(u, v) = (I − P(x)) (D_u P) v`, with `D_u P` by a central difference
/// of the near-manifold extension of `P`.
pub fn second_fundamental_form_fd<M: Manifold + ?Sized>(m: &M, x: &Vector, u: &Vector, v: &Vector) -> Vector {
    let nu = u.norm();
    if nu == 0.0 || v.norm() == 0.0 {
        return Vector::zeros(x.len());
    }
    // Difference along the unit direction, rescaled afterwards.
    let dir = u.scale(1.0 / nu);
    let eps = fd_step(x);
    let plus = m.project_tangent_near(&x.axpy(eps, &dir), v);
    let minus = m.project_tangent_near(&x.axpy(-eps, &dir), v);
    let (plus, minus) = match (plus, minus) {
        (Ok(p), Ok(q)) => (p, q),
        _ => return Vector::from_fn(x.len(), |_| f64::NAN),
    };
    let d = (plus - minus).scale(nu / (2.0 * eps));
    d - m.project_tangent(x, &d)
}

pub fn ito_correction_from_basis<M: Manifold + ?Sized>(m: &M, x: &Vector) -> Vector {
    let mut acc = Vector::zeros(x.len());
    for e in m.tangent_basis(x).as_slice() {
        acc += m.second_fundamental_form(x, e, e);
    }
    acc.scale(0.5)
}

fn rk4_substep<M: Manifold + ?Sized>(m: &M, x: &Vector, w: &Vector, dt: f64) -> Result<(Vector, Vector)> {
    let k1x = *w;
    let k1w = m.geodesic_acceleration(x, &k1x)?;
    let k2x = w.axpy(0.5 * dt, &k1w);
    let k2w = m.geodesic_acceleration(&x.axpy(0.5 * dt, &k1x), &k2x)?;
    let k3x = w.axpy(0.5 * dt, &k2w);
    let k3w = m.geodesic_acceleration(&x.axpy(0.5 * dt, &k2x), &k3x)?;
    let k4x = w.axpy(dt, &k3w);
    let k4w = m.geodesic_acceleration(&x.axpy(dt, &k3x), &k4x)?;
    let sx = k1x + k2x.scale(2.0) + k3x.scale(2.0) + k4x;
    let sw = k1w + k2w.scale(2.0) + k3w.scale(2.0) + k4w;
    Ok((x.axpy(dt / 6.0, &sx), w.axpy(dt / 6.0, &sw)))
}

fn substep_count(v: &Vector, cfg: &GeodesicIntegratorConfig) -> usize {
    ((cfg.substeps_per_unit as f64 * v.norm()).ceil() as usize).max(1)
}

/// Integrates `γ″ = II(γ′, γ′)`, `γ(0) = x`, `γ′(0) = v` over `[0, 1]` with
/// classical RK4, calling `visit(position, velocity)` after every substep.
fn integrate_geodesic<M: Manifold + ?Sized>(
    m: &M,
    x: &Vector,
    v: &Vector,
    cfg: &GeodesicIntegratorConfig,
    mut visit: impl FnMut(&Vector, &Vector),
) -> Result<Vector> {
    if v.norm() == 0.0 {
        return Ok(*x);
    }
    let steps = substep_count(v, cfg);
    let dt = 1.0 / steps as f64;
    let (mut pos, mut vel) = (*x, *v);
    for s in 0..steps {
        let (p, w) = rk4_substep(m, &pos, &vel, dt).map_err(|_| Error::GeodesicLeftTube { substep: s })?;
        if cfg.reproject {
            pos = m.nearest_point(&p).map_err(|_| Error::GeodesicLeftTube { substep: s })?;
            vel = m.project_tangent(&pos, &w);
        } else {
            pos = p;
            vel = w;
        }
        if !pos.is_finite() || !vel.is_finite() {
            return Err(Error::GeodesicLeftTube { substep: s });
        }
        visit(&pos, &vel);
    }
    if !cfg.reproject && m.residual(&pos) > cfg.tolerance {
        return Err(Error::GeodesicLeftTube { substep: steps });
    }
    Ok(pos)
}

/// `exp_x(v)` by integrating the ambient geodesic equation.
pub fn exp_geodesic<M: Manifold + ?Sized>(
    m: &M,
    x: &Vector,
    v: &Vector,
    cfg: &GeodesicIntegratorConfig,
) -> Result<Vector> {
    integrate_geodesic(m, x, v, cfg, |_, _| {})
}

/// The discrete geodesic `(position, velocity)` after each substep.
pub fn geodesic_trajectory<M: Manifold + ?Sized>(
    m: &M,
    x: &Vector,
    v: &Vector,
    cfg: &GeodesicIntegratorConfig,
) -> Result<Vec<(Vector, Vector)>> {
    let mut out = Vec::with_capacity(substep_count(v, cfg));
    integrate_geodesic(m, x, v, cfg, |p, w| out.push((*p, *w)))?;
    Ok(out)
}
