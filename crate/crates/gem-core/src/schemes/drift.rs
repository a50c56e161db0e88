use crate::geometry::Manifold;
use crate::linalg::Vector;

/// A (possibly time-dependent) tangent drift `V(t, x)` with scalar diffusion
/// gain `g(t)`, for the SDE `dX = V(t, X) dt + g(t) dB^M`.
pub trait DriftField: Send + Sync {
    /// `V(t, x)`, tangent at `x`.
    fn drift(&self, manifold: &dyn Manifold, t: f64, x: &Vector) -> Vector;

    fn gain(&self, _t: f64) -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroDrift;

impl DriftField for ZeroDrift {
    fn drift(&self, _manifold: &dyn Manifold, _t: f64, x: &Vector) -> Vector {
        Vector::zeros(x.len())
    }
}

/// `V(x) = P(x) c` for a fixed ambient vector `c`.
#[derive(Debug, Clone, Copy)]
pub struct ProjectedConstant {
    pub direction: Vector,
}

impl DriftField for ProjectedConstant {
    fn drift(&self, manifold: &dyn Manifold, _t: f64, x: &Vector) -> Vector {
        manifold.project_tangent(x, &self.direction)
    }
}

/// A drift and gain given by closures. The drift closure is projected onto
/// the tangent space before use.
pub struct FnDrift<F, G> {
    drift: F,
    gain: G,
}

impl<F, G> FnDrift<F, G>
where
    F: Fn(f64, &Vector) -> Vector + Send + Sync,
    G: Fn(f64) -> f64 + Send + Sync,
{
    pub fn new(drift: F, gain: G) -> Self {
        FnDrift { drift, gain }
    }
}

impl<F, G> DriftField for FnDrift<F, G>
where
    F: Fn(f64, &Vector) -> Vector + Send + Sync,
    G: Fn(f64) -> f64 + Send + Sync,
{
    fn drift(&self, manifold: &dyn Manifold, t: f64, x: &Vector) -> Vector {
        manifold.project_tangent(x, &(self.drift)(t, x))
    }

    fn gain(&self, t: f64) -> f64 {
        (self.gain)(t)
    }
}
