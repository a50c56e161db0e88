//! Time-stepping engines: the intrinsic geometric Euler–Maruyama (GEM) scheme,
//! the extrinsic Euler–Maruyama (EM) scheme on the bump-extended ambient SDE,
//! and a coupled driver that runs both at several step sizes on one shared
//! [`BrownianLattice`].

mod drift;
mod lattice;

pub use drift::{DriftField, FnDrift, ProjectedConstant, ZeroDrift};
pub use lattice::{BrownianLattice, Increments, MAX_LATTICE_ENTRIES};

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{check_dimension, check_on_manifold, extension_weight, GeodesicIntegratorConfig, Manifold};
use crate::linalg::Vector;

/// `exp_x(h·V(t, x) + g(t)·P(x) dW)`.
pub fn gem_step(
    m: &dyn Manifold,
    v: &dyn DriftField,
    cfg: &GeodesicIntegratorConfig,
    t: f64,
    x: &Vector,
    h: f64,
    dw: &Vector,
) -> Result<Vector> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter { name: "h" });
    }
    check_dimension(m, dw)?;
    let noise = m.project_tangent(x, dw).scale(v.gain(t));
    let step = noise.axpy(h, &v.drift(m, t, x));
    m.exp_map(x, &step, cfg)
}

/// `y + h·Ũ(y) + P̃(y) dW` with `Ũ = χ·(V + g²A)∘π` and `P̃ = χ·P∘π`, both
/// cut off at bump radius `r0`. The iterate is not re-projected.
pub fn em_step(
    m: &dyn Manifold,
    v: &dyn DriftField,
    t: f64,
    y: &Vector,
    h: f64,
    dw: &Vector,
    r0: f64,
) -> Result<Vector> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter { name: "h" });
    }
    if !(r0 > 0.0) {
        return Err(Error::InvalidParameter { name: "r0" });
    }
    check_dimension(m, y)?;
    check_dimension(m, dw)?;
    let (chi, x) = extension_weight(m, y, r0);
    let Some(x) = x else {
        return Ok(*y);
    };
    let g = v.gain(t);
    let u = v.drift(m, t, &x).axpy(g * g, &m.ito_correction(&x));
    let noise = m.project_tangent(&x, dw).scale(g);
    Ok(y.axpy(h * chi, &u).axpy(chi, &noise))
}

/// Which scheme produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Gem,
    Em,
}

/// States `X_0, …, X_N` of one scheme on a grid of `steps` uniform steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub kind: SchemeKind,
    pub steps: usize,
    dim: usize,
    states: Vec<f64>,
}

impl Trajectory {
    fn with_capacity(kind: SchemeKind, steps: usize, x0: &Vector) -> Self {
        let mut states = Vec::with_capacity((steps + 1) * x0.len());
        states.extend_from_slice(x0.as_slice());
        Trajectory { kind, steps, dim: x0.len(), states }
    }

    fn push(&mut self, x: &Vector) {
        self.states.extend_from_slice(x.as_slice());
    }

    pub fn len(&self) -> usize {
        self.states.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, k: usize) -> Vector {
        Vector::from_slice(&self.states[k * self.dim..(k + 1) * self.dim])
    }

    pub fn last(&self) -> Vector {
        self.state(self.len() - 1)
    }

    pub fn states(&self) -> impl Iterator<Item = Vector> + '_ {
        self.states.chunks_exact(self.dim).map(Vector::from_slice)
    }

    /// `max_k ‖X_k − Y_{k·stride}‖` over this grid, where `other` is on a grid
    /// `stride` times finer.
    pub fn max_distance(&self, other: &Trajectory) -> f64 {
        let stride = other.steps / self.steps;
        (0..self.len()).map(|k| self.state(k).distance(&other.state(k * stride))).fold(0.0, f64::max)
    }
}

/// The pieces needed to advance a scheme: manifold, drift, geodesic
/// integrator settings, and the EM bump radius.
#[derive(Clone, Copy)]
pub struct Integrator<'a> {
    pub manifold: &'a dyn Manifold,
    pub drift: &'a dyn DriftField,
    pub geodesic: GeodesicIntegratorConfig,
    pub extension_radius: f64,
}

impl<'a> Integrator<'a> {
    /// Defaults: generic integrator settings and `r0` equal to the
    /// manifold's tubular radius.
    pub fn new(manifold: &'a dyn Manifold, drift: &'a dyn DriftField) -> Self {
        Integrator {
            manifold,
            drift,
            geodesic: GeodesicIntegratorConfig::default(),
            extension_radius: manifold.tubular_radius(),
        }
    }

    pub fn with_geodesic(mut self, cfg: GeodesicIntegratorConfig) -> Self {
        self.geodesic = cfg;
        self
    }

    pub fn with_extension_radius(mut self, r0: f64) -> Self {
        self.extension_radius = r0;
        self
    }

    pub fn gem_step(&self, t: f64, x: &Vector, h: f64, dw: &Vector) -> Result<Vector> {
        gem_step(self.manifold, self.drift, &self.geodesic, t, x, h, dw)
    }

    pub fn em_step(&self, t: f64, y: &Vector, h: f64, dw: &Vector) -> Result<Vector> {
        // An infinite tube (flat manifold) makes every point interior.
        let r0 = if self.extension_radius.is_finite() { self.extension_radius } else { f64::MAX };
        em_step(self.manifold, self.drift, t, y, h, dw, r0)
    }

    /// GEM path on the grid with `steps` steps.
    pub fn simulate_gem(&self, x0: &Vector, lattice: &BrownianLattice, steps: usize) -> Result<Trajectory> {
        check_on_manifold(self.manifold, x0)?;
        let inc = lattice.coarsen(steps)?;
        self.run(SchemeKind::Gem, x0, &inc)
    }

    /// EM path on the grid with `steps` steps.
    pub fn simulate_em(&self, y0: &Vector, lattice: &BrownianLattice, steps: usize) -> Result<Trajectory> {
        check_dimension(self.manifold, y0)?;
        let inc = lattice.coarsen(steps)?;
        self.run(SchemeKind::Em, y0, &inc)
    }

    fn run(&self, kind: SchemeKind, x0: &Vector, inc: &Increments) -> Result<Trajectory> {
        let h = inc.step_size();
        let mut path = Trajectory::with_capacity(kind, inc.steps(), x0);
        let mut x = *x0;
        for k in 0..inc.steps() {
            let t = k as f64 * h;
            let dw = inc.get(k);
            x = match kind {
                SchemeKind::Gem => self.gem_step(t, &x, h, &dw),
                SchemeKind::Em => self.em_step(t, &x, h, &dw),
            }
            .map_err(|e| e.at_step(k))?;
            if !x.is_finite() {
                return Err(Error::NonFinite.at_step(k));
            }
            path.push(&x);
        }
        Ok(path)
    }

    /// GEM (and optionally EM) paths at each level in `levels` (step counts,
    /// ascending), plus a GEM reference path on the lattice's fine grid, all
    /// driven by the same increments.
    pub fn simulate_coupled(
        &self,
        x0: &Vector,
        lattice: &BrownianLattice,
        levels: &[usize],
        with_em: bool,
    ) -> Result<TrajectoryBundle> {
        check_on_manifold(self.manifold, x0)?;
        check_levels(levels, lattice.fine_steps())?;
        let fine = lattice.fine();
        let reference = self.run(SchemeKind::Gem, x0, &fine)?;
        let mut gem = Vec::with_capacity(levels.len());
        let mut em = Vec::new();
        for &steps in levels {
            let inc = lattice.coarsen(steps)?;
            if steps == lattice.fine_steps() {
                gem.push(reference.clone());
            } else {
                gem.push(self.run(SchemeKind::Gem, x0, &inc)?);
            }
            if with_em {
                em.push(self.run(SchemeKind::Em, x0, &inc)?);
            }
        }
        Ok(TrajectoryBundle { horizon: lattice.horizon(), levels: levels.to_vec(), reference, gem, em })
    }
}

/// Levels must be ascending powers of two not exceeding `fine`.
pub fn check_levels(levels: &[usize], fine: usize) -> Result<()> {
    for (i, &l) in levels.iter().enumerate() {
        if l == 0 || !l.is_power_of_two() || l > fine {
            return Err(Error::LevelMismatch { level: l, fine });
        }
        if i > 0 && levels[i - 1] >= l {
            return Err(Error::InvalidParameter { name: "levels" });
        }
    }
    Ok(())
}

/// Coupled paths of one Brownian lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryBundle {
    pub horizon: f64,
    pub levels: Vec<usize>,
    /// GEM on the fine grid.
    pub reference: Trajectory,
    /// GEM at each level.
    pub gem: Vec<Trajectory>,
    /// EM at each level; empty unless requested.
    pub em: Vec<Trajectory>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::{LevelSet, Sphere};
    use crate::rng;
    use core::f64::consts::FRAC_PI_2;

    fn v3(a: f64, b: f64, c: f64) -> Vector {
        Vector::from_slice(&[a, b, c])
    }

    #[test]
    fn zero_noise_zero_drift_is_stationary() {
        let s = Sphere::new(3).unwrap();
        let cfg = GeodesicIntegratorConfig::default();
        let x = v3(0.0, 0.6, 0.8);
        assert_eq!(gem_step(&s, &ZeroDrift, &cfg, 0.0, &x, 0.1, &Vector::zeros(3)).unwrap(), x);
    }

    #[test]
    fn sphere_quarter_turn() {
        let s = Sphere::new(3).unwrap();
        let cfg = GeodesicIntegratorConfig::default();
        let y = gem_step(&s, &ZeroDrift, &cfg, 0.0, &v3(1.0, 0.0, 0.0), 0.37, &v3(0.0, FRAC_PI_2, 0.0)).unwrap();
        assert!((y - v3(0.0, 1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn em_step_on_manifold_without_noise_adds_ito_drift() {
        let s = Sphere::new(3).unwrap();
        let x = v3(0.0, 0.0, 1.0);
        let y = em_step(&s, &ZeroDrift, 0.0, &x, 0.01, &Vector::zeros(3), 1.0).unwrap();
        assert!((y - x.axpy(0.01, &s.ito_correction(&x))).norm() < 1e-15);
        let far = v3(0.0, 0.0, 1.6);
        let dw = v3(0.3, -0.2, 0.1);
        assert_eq!(em_step(&s, &ZeroDrift, 0.0, &far, 0.01, &dw, 1.0).unwrap(), far);
    }

    #[test]
    fn torus_gem_stays_on_manifold() {
        let torus = LevelSet::torus(2.0, 0.5).unwrap();
        let drift = ProjectedConstant { direction: v3(0.0, 0.0, 1.0) };
        let integ = Integrator::new(&torus, &drift);
        let mut x = v3(2.5, 0.0, 0.0);
        let mut r = rng::stream(3);
        let h: f64 = 1e-2;
        let mut worst: f64 = 0.0;
        for k in 0..10_000 {
            let dw = rng::gaussian_vector(&mut r, 3).scale(h.sqrt());
            x = integ.gem_step(k as f64 * h, &x, h, &dw).unwrap();
            worst = worst.max(torus.residual(&x));
        }
        assert!(worst <= 1e-8, "{worst}");
    }

    #[test]
    fn sphere_brownian_states_stay_unit_norm() {
        let s = Sphere::new(3).unwrap();
        let integ = Integrator::new(&s, &ZeroDrift);
        let lat = BrownianLattice::generate(1, 1.0, 256, 3).unwrap();
        let path = integ.simulate_gem(&v3(1.0, 0.0, 0.0), &lat, 256).unwrap();
        assert_eq!(path.len(), 257);
        for x in path.states() {
            assert!((x.norm() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn one_step_path_is_gem_step() {
        let s = Sphere::new(3).unwrap();
        let drift = ProjectedConstant { direction: v3(0.0, 0.0, 2.0) };
        let integ = Integrator::new(&s, &drift);
        let lat = BrownianLattice::generate(4, 0.5, 8, 3).unwrap();
        let x0 = v3(1.0, 0.0, 0.0);
        let path = integ.simulate_gem(&x0, &lat, 1).unwrap();
        assert_eq!(path.last(), integ.gem_step(0.0, &x0, 0.5, &lat.total()).unwrap());
    }

    #[test]
    fn circle_angle_increments_have_variance_h() {
        // Brownian motion on the unit circle is wrapped 1-D Brownian motion,
        // so each angle increment is N(0, h).
        let c = LevelSet::circle();
        let integ = Integrator::new(&c, &ZeroDrift);
        let steps = 64;
        let h = 1.0 / steps as f64;
        let mut incs = Vec::new();
        for p in 0..200u64 {
            let lat = BrownianLattice::generate(rng::substream_seed(8, p), 1.0, steps, 2).unwrap();
            let path = integ.simulate_gem(&Vector::from_slice(&[1.0, 0.0]), &lat, steps).unwrap();
            for k in 0..steps {
                let (a, b) = (path.state(k), path.state(k + 1));
                incs.push((a[0] * b[1] - a[1] * b[0]).atan2(a.dot(&b)));
            }
        }
        let n = incs.len() as f64;
        let mean = incs.iter().sum::<f64>() / n;
        let sq: Vec<f64> = incs.iter().map(|d| (d - mean) * (d - mean)).collect();
        let var = sq.iter().sum::<f64>() / (n - 1.0);
        let var_of_sq = sq.iter().map(|s| (s - var) * (s - var)).sum::<f64>() / (n - 1.0);
        let se = (var_of_sq / n).sqrt();
        assert!((var - h).abs() <= 3.0 * se, "var {var} h {h} se {se}");
    }

    #[test]
    fn failing_step_reports_its_index() {
        let s = Sphere::new(3).unwrap();
        let drift =
            FnDrift::new(|t, _x: &Vector| if t > 0.3 { v3(f64::NAN, 0.0, 0.0) } else { v3(0.0, 1.0, 0.0) }, |_| 1.0);
        let integ = Integrator::new(&s, &drift);
        let lat = BrownianLattice::generate(4, 1.0, 8, 3).unwrap();
        match integ.simulate_gem(&v3(1.0, 0.0, 0.0), &lat, 8) {
            Err(Error::Step { index, .. }) => assert_eq!(index, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn coupled_bundle_is_deterministic_and_reference_level_matches() {
        let s = Sphere::new(3).unwrap();
        let drift = ProjectedConstant { direction: v3(0.0, 0.0, 2.0) };
        let integ = Integrator::new(&s, &drift);
        let x0 = v3(1.0, 0.0, 0.0);
        let lat = BrownianLattice::generate(21, 1.0, 64, 3).unwrap();
        let a = integ.simulate_coupled(&x0, &lat, &[4, 16, 64], true).unwrap();
        let b = integ.simulate_coupled(&x0, &lat, &[4, 16, 64], true).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.gem[2].max_distance(&a.reference), 0.0);
        assert_eq!(a.em.len(), 3);
        assert!(integ.simulate_coupled(&x0, &lat, &[16, 4], false).is_err());
        assert!(integ.simulate_coupled(&x0, &lat, &[128], false).is_err());
    }
}
