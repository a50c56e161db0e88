use gem_core::geometry::{self, generic, GeodesicIntegratorConfig, Manifold};
use gem_core::manifolds::{GraphManifold, GraphMap, GraphSpec, LevelSet, Paraboloid, SineGraph, Sphere};
use gem_core::rng;
use gem_core::{Error, Matrix, Vector};
use proptest::prelude::*;

const R: f64 = 2.0;
const RR: f64 = 0.5;

fn v(xs: &[f64]) -> Vector {
    Vector::from_slice(xs)
}

fn torus_point(theta: f64, phi: f64) -> Vector {
    let rho = R + RR * phi.cos();
    v(&[rho * theta.cos(), rho * theta.sin(), RR * phi.sin()])
}

fn torus_normal(theta: f64, phi: f64) -> Vector {
    v(&[phi.cos() * theta.cos(), phi.cos() * theta.sin(), phi.sin()])
}

fn torus_frame(theta: f64, phi: f64) -> (Vector, Vector) {
    let rho = R + RR * phi.cos();
    let d_theta = v(&[-rho * theta.sin(), rho * theta.cos(), 0.0]);
    let d_phi = v(&[-RR * phi.sin() * theta.cos(), -RR * phi.sin() * theta.sin(), RR * phi.cos()]);
    (d_theta, d_phi)
}

fn paraboloid_point(a: f64, base: &[f64]) -> Vector {
    let s: f64 = base.iter().map(|b| b * b).sum();
    let mut out = base.to_vec();
    out.push(a * s);
    v(&out)
}

fn paraboloid_normal(a: f64, base: &[f64]) -> Vector {
    let mut out: Vec<f64> = base.iter().map(|b| -2.0 * a * b).collect();
    out.push(1.0);
    let n = v(&out);
    n.scale(1.0 / n.norm())
}

struct Family {
    name: &'static str,
    manifold: Box<dyn Manifold>,
    /// Random point, a unit normal there, and the largest safe normal offset.
    sample: Box<dyn Fn(&mut rng::Stream) -> (Vector, Vector, f64)>,
}

fn families() -> Vec<Family> {
    let uniform = |r: &mut rng::Stream, lo: f64, hi: f64| lo + (hi - lo) * rand::Rng::random::<f64>(r);
    vec![
        Family {
            name: "sphere",
            manifold: Box::new(Sphere::new(3).unwrap()),
            sample: Box::new(|r| {
                let g = rng::gaussian_vector(r, 3);
                let x = g.scale(1.0 / g.norm());
                (x, x, 0.9)
            }),
        },
        Family {
            name: "levelset-sphere",
            manifold: Box::new(LevelSet::sphere(3).unwrap()),
            sample: Box::new(|r| {
                let g = rng::gaussian_vector(r, 3);
                let x = g.scale(1.0 / g.norm());
                (x, x, 0.9)
            }),
        },
        Family {
            name: "torus",
            manifold: Box::new(LevelSet::torus(R, RR).unwrap()),
            sample: Box::new(move |r| {
                let (t, p) = (uniform(r, 0.0, 6.3), uniform(r, 0.0, 6.3));
                (torus_point(t, p), torus_normal(t, p), 0.45)
            }),
        },
        Family {
            name: "paraboloid",
            manifold: Box::new(GraphManifold::new(Paraboloid { m: 2, a: 0.5 }.spec()).unwrap()),
            sample: Box::new(move |r| {
                let base = [uniform(r, -0.7, 0.7), uniform(r, -0.7, 0.7)];
                (paraboloid_point(0.5, &base), paraboloid_normal(0.5, &base), 0.3)
            }),
        },
        Family {
            name: "sine",
            manifold: Box::new(GraphManifold::new(SineGraph.spec()).unwrap()),
            sample: Box::new(move |r| {
                let t = uniform(r, -3.0, 3.0);
                let n = v(&[-t.cos(), 1.0]);
                (v(&[t, t.sin()]), n.scale(1.0 / n.norm()), 0.3)
            }),
        },
    ]
}

fn random_tangent(m: &dyn Manifold, x: &Vector, r: &mut rng::Stream) -> Vector {
    m.project_tangent(x, &rng::gaussian_vector(r, m.ambient_dim()))
}

#[test]
fn projector_is_symmetric_idempotent_with_trace_m() {
    for f in families() {
        let mut r = rng::stream(1);
        for _ in 0..50 {
            let (x, nrm, _) = (f.sample)(&mut r);
            let p = geometry::tangent_projection(f.manifold.as_ref(), &x).unwrap();
            assert!(p.symmetry_defect() <= 1e-12, "{}", f.name);
            assert!(p.idempotency_defect() <= 1e-10, "{}", f.name);
            assert!((p.trace() - f.manifold.dim() as f64).abs() <= 1e-10, "{}", f.name);
            // the independently known normal is annihilated
            assert!(p.apply(&nrm).norm() <= 1e-10, "{}", f.name);
        }
    }
}

#[test]
fn torus_projector_fixes_parametrization_tangents() {
    let t = LevelSet::torus(R, RR).unwrap();
    let mut r = rng::stream(2);
    for _ in 0..50 {
        let (a, b) = (rand::Rng::random::<f64>(&mut r) * 6.3, rand::Rng::random::<f64>(&mut r) * 6.3);
        let x = torus_point(a, b);
        let (ta, tb) = torus_frame(a, b);
        assert!((t.project_tangent(&x, &ta) - ta).norm() <= 1e-10 * ta.norm());
        assert!((t.project_tangent(&x, &tb) - tb).norm() <= 1e-10 * tb.norm());
    }
}

#[test]
fn second_fundamental_form_is_normal_symmetric_bilinear() {
    for f in families() {
        let m = f.manifold.as_ref();
        let mut r = rng::stream(3);
        for _ in 0..30 {
            let (x, _, _) = (f.sample)(&mut r);
            let (u, w, z) =
                (random_tangent(m, &x, &mut r), random_tangent(m, &x, &mut r), random_tangent(m, &x, &mut r));
            let ii = geometry::second_fundamental_form(m, &x, &u, &w).unwrap();
            let scale = u.norm() * w.norm();
            assert!(m.project_tangent(&x, &ii).norm() <= 1e-8 * scale.max(1.0), "{} normal", f.name);
            assert!((ii - m.second_fundamental_form(&x, &w, &u)).norm() <= 1e-8 * scale.max(1.0), "{} sym", f.name);
            let (a, b) = (1.7, -0.4);
            let lhs = m.second_fundamental_form(&x, &u.scale(a).axpy(b, &z), &w);
            let rhs = ii.scale(a).axpy(b, &m.second_fundamental_form(&x, &z, &w));
            assert!((lhs - rhs).norm() <= 1e-7 * (1.0 + rhs.norm()), "{} bilinear", f.name);
        }
    }
}

#[test]
fn torus_second_fundamental_form_matches_parametrization() {
    // II(∂ᵢX, ∂ⱼX) is the normal part of ∂ᵢ∂ⱼX.
    let t = LevelSet::torus(R, RR).unwrap();
    let mut r = rng::stream(4);
    for _ in 0..50 {
        let (a, b) = (rand::Rng::random::<f64>(&mut r) * 6.3, rand::Rng::random::<f64>(&mut r) * 6.3);
        let x = torus_point(a, b);
        let n = torus_normal(a, b);
        let (ta, tb) = torus_frame(a, b);
        let rho = R + RR * b.cos();
        let x_aa = v(&[-rho * a.cos(), -rho * a.sin(), 0.0]);
        let x_bb = v(&[-RR * b.cos() * a.cos(), -RR * b.cos() * a.sin(), -RR * b.sin()]);
        let x_ab = v(&[RR * b.sin() * a.sin(), -RR * b.sin() * a.cos(), 0.0]);
        for (u, w, d) in [(ta, ta, x_aa), (tb, tb, x_bb), (ta, tb, x_ab)] {
            let expect = n.scale(n.dot(&d));
            let got = t.second_fundamental_form(&x, &u, &w);
            assert!((got - expect).norm() <= 1e-10 * (1.0 + expect.norm()));
        }
    }
}

#[test]
fn level_set_formula_matches_finite_difference_second_form() {
    for m in [LevelSet::torus(R, RR).unwrap(), LevelSet::sphere(3).unwrap(), LevelSet::sphere(5).unwrap()] {
        let mut r = rng::stream(5);
        let n = m.ambient_dim();
        for _ in 0..50 {
            let y = rng::gaussian_vector(&mut r, n).scale(0.1)
                + if n == 3 && m.name() == "torus" { v(&[2.4, 0.3, 0.1]) } else { Vector::basis(n, 0) };
            let x = m.nearest_point(&y).unwrap();
            let (u, w) = (random_tangent(&m, &x, &mut r), random_tangent(&m, &x, &mut r));
            let exact = m.second_fundamental_form(&x, &u, &w);
            let fd = generic::second_fundamental_form_fd(&m, &x, &u, &w);
            assert!((exact - fd).norm() <= 1e-5 * exact.norm().max(u.norm() * w.norm()), "{}", m.name());
        }
    }
}

#[test]
fn sphere_closed_forms_agree_with_level_set_representation() {
    let s = Sphere::new(3).unwrap();
    let ls = LevelSet::sphere(3).unwrap();
    let cfg = GeodesicIntegratorConfig::default();
    let mut r = rng::stream(6);
    for _ in 0..30 {
        let g = rng::gaussian_vector(&mut r, 3);
        let x = g.scale(1.0 / g.norm());
        let (u, w) = (random_tangent(&s, &x, &mut r), random_tangent(&s, &x, &mut r));
        assert!(s.projection_matrix(&x).sub(&ls.projection_matrix(&x)).max_abs() <= 1e-12);
        assert!((s.second_fundamental_form(&x, &u, &w) - ls.second_fundamental_form(&x, &u, &w)).norm() <= 1e-10);
        assert!((s.ito_correction(&x) - ls.ito_correction(&x)).norm() <= 1e-10);
        assert!((s.ito_correction(&x) - generic::ito_correction_from_basis(&s, &x)).norm() <= 1e-12);
        let vv = u.scale(0.8 / u.norm());
        let closed = s.exp_map(&x, &vv, &cfg).unwrap();
        let ode = ls.exp_map(&x, &vv, &cfg).unwrap();
        assert!((closed - ode).norm() <= 1e-8, "{}", (closed - ode).norm());
        assert!(ls.residual(&ode) <= 1e-8);
    }
}

#[test]
fn sphere_taylor_remainder_is_bounded() {
    let s = Sphere::new(3).unwrap();
    let cb = s.curvature_bounds().unwrap();
    let c = (cb.kappa1 * cb.kappa1 + cb.kappa2.unwrap()) / 6.0;
    let cfg = GeodesicIntegratorConfig::default();
    let mut r = rng::stream(7);
    for _ in 0..1000 {
        let g = rng::gaussian_vector(&mut r, 3);
        let x = g.scale(1.0 / g.norm());
        let u = random_tangent(&s, &x, &mut r);
        let len = 0.5 * rand::Rng::random::<f64>(&mut r);
        let vv = u.scale(len / u.norm());
        let taylor = x + vv + s.second_fundamental_form(&x, &vv, &vv).scale(0.5);
        let rem = (geometry::exp_map(&s, &x, &vv, &cfg).unwrap() - taylor).norm();
        assert!(rem <= c * len.powi(3) * (1.0 + 1e-3));
    }
}

#[test]
fn shape_operator_identity() {
    // (I − S_{x,ξ}) Dπ(x + ξ) = P(x), with Dπ by central differences.
    for f in families() {
        let m = f.manifold.as_ref();
        let n = m.ambient_dim();
        let mut r = rng::stream(8);
        for _ in 0..20 {
            let (x, nrm, reach) = (f.sample)(&mut r);
            let t = reach * (2.0 * rand::Rng::random::<f64>(&mut r) - 1.0) * 0.5;
            let xi = nrm.scale(t);
            let y = x + xi;
            let eps = 1e-5;
            let dpi = Matrix::from_columns(
                &(0..n)
                    .map(|j| {
                        let e = Vector::basis(n, j);
                        (m.nearest_point(&y.axpy(eps, &e)).unwrap() - m.nearest_point(&y.axpy(-eps, &e)).unwrap())
                            .scale(0.5 / eps)
                    })
                    .collect::<Vec<_>>(),
            );
            let s = geometry::shape_operator(m, &x, &xi).unwrap();
            let lhs = Matrix::identity(n).sub(&s).mul(&dpi);
            let err = lhs.sub(&m.projection_matrix(&x)).max_abs();
            assert!(err <= 1e-4, "{}: {err}", f.name);
        }
    }
}

#[test]
fn nearest_point_inverts_normal_offsets() {
    for f in families() {
        let m = f.manifold.as_ref();
        let mut r = rng::stream(9);
        for _ in 0..1000 {
            let (x, nrm, reach) = (f.sample)(&mut r);
            let t = reach * (2.0 * rand::Rng::random::<f64>(&mut r) - 1.0);
            let y = x.axpy(t, &nrm);
            let p = geometry::nearest_point_projection(m, &y).unwrap();
            assert!((p - x).norm() <= 1e-9 * (1.0 + x.norm()), "{}: {}", f.name, (p - x).norm());
        }
    }
}

#[test]
fn ito_correction_of_sphere_and_torus_outer_equator() {
    let s = Sphere::new(4).unwrap();
    let x = v(&[0.0, 0.6, 0.0, 0.8]);
    assert!((s.ito_correction(&x) - x.scale(-1.5)).norm() <= 1e-14);
    // outer equator: principal curvatures 1/r and 1/(R + r), normal (1, 0, 0)
    let t = LevelSet::torus(R, RR).unwrap();
    let a = t.ito_correction(&v(&[R + RR, 0.0, 0.0]));
    let expect = -0.5 * (1.0 / RR + 1.0 / (R + RR));
    assert!((a - v(&[expect, 0.0, 0.0])).norm() <= 1e-10);
}

#[test]
fn generic_geodesics_conserve_speed_and_stay_on_torus() {
    let t = LevelSet::torus(R, RR).unwrap();
    let cfg = GeodesicIntegratorConfig::default();
    let x = torus_point(0.3, 1.1);
    let u = random_tangent(&t, &x, &mut rng::stream(10));
    let vv = u.scale(1.5 / u.norm());
    let traj = generic::geodesic_trajectory(&t, &x, &vv, &cfg).unwrap();
    for (p, w) in &traj {
        assert!(t.residual(p) <= 1e-8);
        assert!((w.norm() - 1.5).abs() <= 1e-6);
    }
    let end = geometry::exp_map(&t, &x, &vv, &cfg).unwrap();
    assert!(t.residual(&end) <= 1e-8);
    assert_eq!(end, traj.last().unwrap().0);
}

#[test]
fn tubular_radii() {
    assert_eq!(LevelSet::torus(R, RR).unwrap().tubular_radius(), 0.5);
    assert_eq!(Sphere::new(3).unwrap().tubular_radius(), 1.0);
    let g = GraphManifold::new(SineGraph.spec()).unwrap();
    assert!((g.tubular_radius() - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(GraphManifold::tubular_radius_bound(1.0, 0.0), f64::INFINITY);
}

#[test]
fn construction_errors() {
    assert!(LevelSet::torus(1.0, 0.5).is_err());
    assert!(Sphere::new(1).is_err());
    struct Wrong;
    impl GraphMap for Wrong {
        fn base_dim(&self) -> usize {
            1
        }
        fn codim(&self) -> usize {
            1
        }
        fn value(&self, x: &Vector) -> Vector {
            v(&[x[0] * x[0]])
        }
        fn jacobian(&self, x: &Vector) -> Matrix {
            Matrix::from_fn(1, 1, |_, _| 3.0 * x[0])
        }
        fn second_derivative(&self, _x: &Vector, u: &Vector, w: &Vector) -> Vector {
            v(&[2.0 * u[0] * w[0]])
        }
    }
    let spec = GraphSpec { map: Box::new(Wrong), c1: 1.0, c2: 1.0, curvature: None };
    assert!(matches!(GraphManifold::new(spec), Err(Error::DerivativeMismatch { .. })));
    let t = LevelSet::torus(R, RR).unwrap();
    assert!(t.nearest_point(&Vector::zeros(3)).is_err());
    assert!(Sphere::new(3).unwrap().nearest_point(&Vector::zeros(3)).is_err());
}

proptest! {
    #[test]
    fn torus_exp_stays_on_manifold(a in 0.0f64..6.3, b in 0.0f64..6.3, c1 in -1.0f64..1.0, c2 in -1.0f64..1.0) {
        let t = LevelSet::torus(R, RR).unwrap();
        let x = torus_point(a, b);
        let (ta, tb) = torus_frame(a, b);
        let vv = ta.scale(c1 / ta.norm()).axpy(c2 / tb.norm(), &tb);
        let y = geometry::exp_map(&t, &x, &vv, &GeodesicIntegratorConfig::default()).unwrap();
        prop_assert!(t.residual(&y) <= 1e-8);
    }

    #[test]
    fn sphere_exp_preserves_norm_and_distance(seed in 0u64..100_000, len in 0.0f64..3.0) {
        let s = Sphere::new(3).unwrap();
        let mut r = rng::stream(seed);
        let g = rng::gaussian_vector(&mut r, 3);
        let x = g.scale(1.0 / g.norm());
        let u = random_tangent(&s, &x, &mut r);
        let y = s.exp_map(&x, &u.scale(len / u.norm()), &GeodesicIntegratorConfig::default()).unwrap();
        prop_assert!((y.norm() - 1.0).abs() <= 1e-12);
        prop_assert!((x.dot(&y).clamp(-1.0, 1.0).acos() - len).abs() <= 1e-7);
    }
}
