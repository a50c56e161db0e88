//! Bump-function extension of on-manifold fields to all of `ℝⁿ`, and the
//! radial clamp.

#[allow(unused_imports)]
use num_traits::Float;

use super::Manifold;
use crate::error::Result;
use crate::linalg::Vector;

fn flat_exp(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// Smooth step `θ(s) = φ(s) / (φ(s) + φ(1 − s))`, `φ(s) = e^{−1/s}` for
/// `s > 0`. Equals 0 for `s ≤ 0` and 1 for `s ≥ 1`.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let a = flat_exp(s);
    let b = flat_exp(1.0 - s);
    a / (a + b)
}

/// Smooth cutoff `ψ(t) = 1 − θ(2t/r − 1)`: 1 on `[0, r/2]`, 0 on `[r, ∞)`.
pub fn cutoff(t: f64, r: f64) -> f64 {
    1.0 - smooth_step(2.0 * t / r - 1.0)
}

/// The extension weight `χ(y)` together with `π(y)` when `χ(y) > 0`.
///
/// `χ(y) = ψ(d(y, M))` with the cutoff taken at radius `r0/2`, so `χ ≡ 1` for
/// `d ≤ r0/4` and `χ ≡ 0` for `d ≥ r0/2`. The distance is `‖y − π(y)‖`; a
/// projection that fails to converge places `y` outside the support.
pub fn extension_weight<M: Manifold + ?Sized>(m: &M, y: &Vector, r0: f64) -> (f64, Option<Vector>) {
    match m.nearest_point(y) {
        Ok(x) => {
            let chi = cutoff(y.distance(&x), 0.5 * r0);
            if chi > 0.0 {
                (chi, Some(x))
            } else {
                (0.0, None)
            }
        }
        Err(_) => (0.0, None),
    }
}

/// `χ(y)` for bump radius `r0`.
pub fn bump_value<M: Manifold + ?Sized>(m: &M, y: &Vector, r0: f64) -> f64 {
    extension_weight(m, y, r0).0
}

/// A field on `M` extended to `ℝⁿ` by `y ↦ χ(y) F(π(y))`.
pub struct Extension<'a, M: ?Sized, F> {
    manifold: &'a M,
    field: F,
    radius: f64,
}

impl<M, F> Extension<'_, M, F>
where
    M: Manifold + ?Sized,
    F: Fn(&Vector) -> Result<Vector>,
{
    pub fn eval(&self, y: &Vector) -> Result<Vector> {
        match extension_weight(self.manifold, y, self.radius) {
            (chi, Some(x)) => Ok((self.field)(&x)?.scale(chi)),
            _ => Ok(Vector::zeros(y.len())),
        }
    }
}

pub fn extend_field<M, F>(manifold: &M, field: F, r0: f64) -> Extension<'_, M, F>
where
    M: Manifold + ?Sized,
    F: Fn(&Vector) -> Result<Vector>,
{
    Extension { manifold, field, radius: r0 }
}

/// Metric projection onto the closed ball of radius `r`.
pub fn radial_clamp(r: f64, z: &Vector) -> Vector {
    let nz = z.norm();
    if nz <= r {
        *z
    } else {
        z.scale(r / nz)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::Sphere;
    use proptest::prelude::*;

    #[test]
    fn cutoff_plateaus_and_support() {
        let r = 0.5;
        assert_eq!(cutoff(0.0, r), 1.0);
        assert_eq!(cutoff(0.25, r), 1.0);
        assert_eq!(cutoff(0.5, r), 0.0);
        assert_eq!(cutoff(2.0, r), 0.0);
        // θ(1/2) = 1/2 by symmetry
        assert!((cutoff(0.375, r) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bump_on_sphere() {
        let s = Sphere::new(3).unwrap();
        let r0 = 1.0;
        assert_eq!(bump_value(&s, &Vector::from_slice(&[0.0, 1.0, 0.0]), r0), 1.0);
        assert_eq!(bump_value(&s, &Vector::from_slice(&[0.0, 2.0, 0.0]), r0), 0.0);
        // d = 3r0/8 sits strictly inside the transition band
        let mid = bump_value(&s, &Vector::from_slice(&[0.0, 1.375, 0.0]), r0);
        assert!(mid > 0.0 && mid < 1.0);
        // y = 0 has no projection: outside the support
        assert_eq!(bump_value(&s, &Vector::zeros(3), r0), 0.0);
    }

    #[test]
    fn bump_decreases_across_the_band() {
        let s = Sphere::new(3).unwrap();
        let mut prev = 1.0;
        for k in 0..=40 {
            let d = 0.25 + 0.25 * k as f64 / 40.0;
            let v = bump_value(&s, &Vector::from_slice(&[1.0 + d, 0.0, 0.0]), 1.0);
            assert!(v <= prev);
            prev = v;
        }
        assert_eq!(prev, 0.0);
    }

    #[test]
    fn extension_matches_field_on_manifold_and_vanishes_outside() {
        let s = Sphere::new(3).unwrap();
        let field = |x: &Vector| Ok(x.scale(2.0));
        let ext = extend_field(&s, field, 1.0);
        let x = Vector::from_slice(&[0.0, 0.6, 0.8]);
        assert_eq!(ext.eval(&x).unwrap(), x.scale(2.0));
        assert_eq!(ext.eval(&x.scale(1.6)).unwrap(), Vector::zeros(3));
        // Inside the transition band both factors are independently known.
        let y = x.scale(1.375);
        let chi = cutoff(0.375, 0.5);
        let expect = x.scale(2.0 * chi);
        assert!((ext.eval(&y).unwrap() - expect).norm() < 1e-15);
    }

    #[test]
    fn radial_clamp_examples() {
        let inside = Vector::from_slice(&[0.6, 0.8]);
        assert_eq!(radial_clamp(1.0, &inside), inside);
        let out = radial_clamp(1.0, &Vector::from_slice(&[3.0, 4.0]));
        assert!((out - inside).norm() < 1e-15);
    }

    fn vec3() -> impl Strategy<Value = Vector> {
        prop::array::uniform3(-5.0f64..5.0).prop_map(|a| Vector::from_slice(&a))
    }

    proptest! {
        #[test]
        fn radial_clamp_is_one_lipschitz_in_z(r in 0.1f64..3.0, a in vec3(), b in vec3()) {
            let d = radial_clamp(r, &a).distance(&radial_clamp(r, &b));
            prop_assert!(d <= a.distance(&b) + 1e-12);
        }

        #[test]
        fn radial_clamp_is_one_lipschitz_in_r(r1 in 0.1f64..3.0, r2 in 0.1f64..3.0, z in vec3()) {
            let d = radial_clamp(r1, &z).distance(&radial_clamp(r2, &z));
            prop_assert!(d <= (r1 - r2).abs() + 1e-12);
        }
    }
}
