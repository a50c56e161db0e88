use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::curve::{CurveEntry, ErrorCurve, ErrorKind};
use crate::error::{Error, Result};
use crate::exec::PathExecutor;
use crate::geometry::check_on_manifold;
use crate::linalg::Vector;
use crate::rng;
use crate::schemes::{check_levels, BrownianLattice, Integrator, Trajectory};

/// Number of contiguous path batches used for standard errors.
pub const SE_BATCHES: usize = 16;

/// A multi-level strong-error or coupling experiment.
#[derive(Clone)]
pub struct CurveSetup<'a> {
    pub integrator: Integrator<'a>,
    pub x0: Vector,
    pub horizon: f64,
    /// Step counts per level, ascending (so `h` decreases).
    pub levels: Vec<usize>,
    /// Step count of the reference GEM path.
    pub reference_steps: usize,
    pub n_paths: usize,
    pub p: f64,
    pub seed: u64,
}

impl CurveSetup<'_> {
    fn validate(&self) -> Result<()> {
        check_on_manifold(self.integrator.manifold, &self.x0)?;
        if !(self.p >= 1.0) {
            return Err(Error::InvalidParameter { name: "p" });
        }
        if self.n_paths < ErrorCurve::MIN_PATHS {
            return Err(Error::InvalidParameter { name: "n_paths" });
        }
        if self.levels.is_empty() {
            return Err(Error::InvalidParameter { name: "levels" });
        }
        if self.reference_steps == 0 || !self.reference_steps.is_power_of_two() {
            return Err(Error::InvalidParameter { name: "reference_steps" });
        }
        check_levels(&self.levels, self.reference_steps)
    }

    fn lattice(&self, path: usize, fine_steps: usize) -> Result<BrownianLattice> {
        let dim = self.integrator.manifold.ambient_dim();
        BrownianLattice::generate(rng::substream_seed(self.seed, path as u64), self.horizon, fine_steps, dim)
    }

    fn curve(&self, kind: ErrorKind, per_path: &[Vec<f64>]) -> Result<ErrorCurve> {
        let entries = self
            .levels
            .iter()
            .enumerate()
            .map(|(l, &steps)| {
                let column: Vec<f64> = per_path.iter().map(|e| e[l]).collect();
                let (error, stderr) = batched_moment(&column, self.p);
                CurveEntry { h: self.horizon / steps as f64, error, stderr, n_paths: self.n_paths }
            })
            .collect();
        ErrorCurve::new(kind, self.p, entries)
    }
}

/// `(mean xᵖ)^{1/p}` and its standard error from [`SE_BATCHES`] contiguous
/// batches.
pub fn batched_moment(values: &[f64], p: f64) -> (f64, f64) {
    let root = |s: &[f64]| (s.iter().map(|v| v.powf(p)).sum::<f64>() / s.len() as f64).powf(1.0 / p);
    let estimate = root(values);
    let n = values.len();
    let b = SE_BATCHES.min(n);
    if b < 2 {
        return (estimate, 0.0);
    }
    let batch: Vec<f64> = (0..b).map(|i| root(&values[i * n / b..(i + 1) * n / b])).collect();
    let mean = batch.iter().sum::<f64>() / b as f64;
    let var = batch.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (b - 1) as f64;
    (estimate, (var / b as f64).sqrt())
}

/// Strong error `(E max_k ‖X^h_k − X^ref_{t_k}‖ᵖ)^{1/p}` per level, with the
/// maximum over the coarse grid and the reference subsampled onto it.
pub fn strong_error_curve<E: PathExecutor>(setup: &CurveSetup<'_>, exec: &E) -> Result<ErrorCurve> {
    setup.validate()?;
    let per_path = exec.map(setup.n_paths, |i| -> Result<Vec<f64>> {
        let lattice = setup.lattice(i, setup.reference_steps)?;
        let integ = &setup.integrator;
        let reference = integ.simulate_gem(&setup.x0, &lattice, setup.reference_steps)?;
        setup
            .levels
            .iter()
            .map(|&steps| {
                if steps == setup.reference_steps {
                    return Ok(0.0);
                }
                Ok(integ.simulate_gem(&setup.x0, &lattice, steps)?.max_distance(&reference))
            })
            .collect()
    });
    let per_path = per_path.into_iter().collect::<Result<Vec<_>>>()?;
    setup.curve(ErrorKind::StrongVsReference, &per_path)
}

/// GEM–EM discrepancy `(E max_k ‖X^h_k − Y^h_k‖ᵖ)^{1/p}` per level, both
/// schemes on the same increments.
pub fn coupling_discrepancy_curve<E: PathExecutor>(setup: &CurveSetup<'_>, exec: &E) -> Result<ErrorCurve> {
    setup.validate()?;
    let fine = *setup.levels.last().unwrap_or(&1);
    let per_path = exec.map(setup.n_paths, |i| -> Result<Vec<f64>> {
        let lattice = setup.lattice(i, fine)?;
        let integ = &setup.integrator;
        setup
            .levels
            .iter()
            .map(|&steps| {
                let gem = integ.simulate_gem(&setup.x0, &lattice, steps)?;
                let em = integ.simulate_em(&setup.x0, &lattice, steps)?;
                Ok(gem.max_distance(&em))
            })
            .collect()
    });
    let per_path = per_path.into_iter().collect::<Result<Vec<_>>>()?;
    setup.curve(ErrorKind::Coupling, &per_path)
}

/// Running mean and centered sum of squares of `Δ` at one step size.
#[derive(Clone, Copy)]
struct Moments {
    count: f64,
    mean: Vector,
    m2: f64,
}

impl Moments {
    fn new(n: usize) -> Self {
        Moments { count: 0.0, mean: Vector::zeros(n), m2: 0.0 }
    }

    fn push(&mut self, d: &Vector) {
        self.count += 1.0;
        let delta = *d - self.mean;
        self.mean = self.mean.axpy(1.0 / self.count, &delta);
        self.m2 += delta.dot(&(*d - self.mean));
    }

    fn merge(&self, other: &Moments) -> Moments {
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean.axpy(other.count / count, &delta),
            m2: self.m2 + other.m2 + delta.norm_squared() * self.count * other.count / count,
        }
    }

    fn centered(&self) -> f64 {
        self.m2 / self.count
    }
}

/// One-step comparison of GEM and EM from `x`: for each `h`, the norm of the
/// mean of `Φ_G(x, ΔW) − Φ_E(x, ΔW)` and its centered second moment
/// `mean ‖Δ − mean Δ‖²`. The same standard normals drive every `h`
/// (`ΔW = √h ξ`), split into [`SE_BATCHES`] seeded batches.
pub fn one_step_bias<E: PathExecutor>(
    integrator: &Integrator<'_>,
    x: &Vector,
    h_list: &[f64],
    n_samples: usize,
    seed: u64,
    exec: &E,
) -> Result<(ErrorCurve, ErrorCurve)> {
    check_on_manifold(integrator.manifold, x)?;
    if n_samples < ErrorCurve::MIN_PATHS {
        return Err(Error::InvalidParameter { name: "n_samples" });
    }
    let n = integrator.manifold.ambient_dim();
    let per_batch = exec.map(SE_BATCHES, |b| -> Result<Vec<Moments>> {
        let mut stream = rng::substream(seed, b as u64);
        let count = (b + 1) * n_samples / SE_BATCHES - b * n_samples / SE_BATCHES;
        let mut acc = vec![Moments::new(n); h_list.len()];
        for _ in 0..count {
            let xi = rng::gaussian_vector(&mut stream, n);
            for (m, &h) in acc.iter_mut().zip(h_list) {
                let dw = xi.scale(h.sqrt());
                let g = integrator.gem_step(0.0, x, h, &dw)?;
                let e = integrator.em_step(0.0, x, h, &dw)?;
                m.push(&(g - e));
            }
        }
        Ok(acc)
    });
    let per_batch = per_batch.into_iter().collect::<Result<Vec<_>>>()?;
    let mut bias = Vec::with_capacity(h_list.len());
    let mut centered = Vec::with_capacity(h_list.len());
    for (j, &h) in h_list.iter().enumerate() {
        let total = per_batch.iter().skip(1).fold(per_batch[0][j], |acc, b| acc.merge(&b[j]));
        let c = total.centered();
        let batch_c: Vec<f64> = per_batch.iter().map(|b| b[j].centered()).collect();
        let mb = batch_c.iter().sum::<f64>() / SE_BATCHES as f64;
        let vb = batch_c.iter().map(|v| (v - mb) * (v - mb)).sum::<f64>() / (SE_BATCHES - 1) as f64;
        bias.push(CurveEntry { h, error: total.mean.norm(), stderr: (c / total.count).sqrt(), n_paths: n_samples });
        centered.push(CurveEntry { h, error: c, stderr: (vb / SE_BATCHES as f64).sqrt(), n_paths: n_samples });
    }
    Ok((
        ErrorCurve::new(ErrorKind::OneStepBias, 1.0, bias)?,
        ErrorCurve::new(ErrorKind::OneStepCentered, 2.0, centered)?,
    ))
}

/// Paths of GEM on the lattice's fine grid.
pub fn simulate_paths<E: PathExecutor>(
    integrator: &Integrator<'_>,
    x0: &Vector,
    horizon: f64,
    steps: usize,
    n_paths: usize,
    seed: u64,
    exec: &E,
) -> Result<Vec<Trajectory>> {
    let dim = integrator.manifold.ambient_dim();
    exec.map(n_paths, |i| {
        let lattice = BrownianLattice::generate(rng::substream_seed(seed, i as u64), horizon, steps, dim)?;
        integrator.simulate_gem(x0, &lattice, steps)
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::manifolds::{FlatGraph, GraphManifold, Sphere};
    use crate::schemes::{ProjectedConstant, ZeroDrift};

    #[test]
    fn batched_moment_of_constant_has_zero_se() {
        let (e, se) = batched_moment(&[2.0; 64], 2.0);
        assert!((e - 2.0).abs() < 1e-15);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn reference_level_has_zero_error() {
        let s = Sphere::new(3).unwrap();
        let drift = ProjectedConstant { direction: Vector::from_slice(&[0.0, 0.0, 2.0]) };
        let setup = CurveSetup {
            integrator: Integrator::new(&s, &drift),
            x0: Vector::from_slice(&[1.0, 0.0, 0.0]),
            horizon: 1.0,
            levels: vec![4, 8, 64],
            reference_steps: 64,
            n_paths: 32,
            p: 2.0,
            seed: 3,
        };
        let c = strong_error_curve(&setup, &Sequential).unwrap();
        assert_eq!(c.entries()[2].error, 0.0);
        assert!(c.entries()[0].error > c.entries()[1].error);
        let bad = CurveSetup { levels: vec![128], ..setup.clone() };
        assert!(strong_error_curve(&bad, &Sequential).is_err());
    }

    #[test]
    fn stationary_schemes_have_zero_discrepancy() {
        // A flat manifold with V = 0 has exp_x(v) = x + v and A = 0, so both
        // schemes are the same random walk.
        let flat = GraphManifold::new(FlatGraph { m: 2, k: 1 }.spec()).unwrap();
        let setup = CurveSetup {
            integrator: Integrator::new(&flat, &ZeroDrift),
            x0: Vector::from_slice(&[0.3, -0.2, 0.0]),
            horizon: 1.0,
            levels: vec![4, 8, 16, 32],
            reference_steps: 32,
            n_paths: 32,
            p: 2.0,
            seed: 1,
        };
        let c = coupling_discrepancy_curve(&setup, &Sequential).unwrap();
        assert!(c.entries().iter().all(|e| e.error <= 1e-12));
        let hs: Vec<f64> = (4..10).map(|k| 2f64.powi(-k)).collect();
        let (bias, centered) = one_step_bias(&setup.integrator, &setup.x0, &hs, 64, 2, &Sequential).unwrap();
        assert!(bias.entries().iter().all(|e| e.error <= 1e-14));
        assert!(centered.entries().iter().all(|e| e.error <= 1e-28));
    }

    #[test]
    fn moments_merge_matches_single_pass() {
        let mut r = rng::stream(4);
        let xs: Vec<Vector> = (0..100).map(|_| rng::gaussian_vector(&mut r, 3)).collect();
        let mut all = Moments::new(3);
        let mut a = Moments::new(3);
        let mut b = Moments::new(3);
        for (i, x) in xs.iter().enumerate() {
            all.push(x);
            if i < 37 {
                a.push(x)
            } else {
                b.push(x)
            }
        }
        let m = a.merge(&b);
        assert!((m.mean - all.mean).norm() < 1e-14);
        assert!((m.m2 - all.m2).abs() < 1e-10);
    }
}
