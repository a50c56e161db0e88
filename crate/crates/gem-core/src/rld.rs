//! Riemannian Langevin dynamics `dX = −½∇φ(X) dt + dB^M`, discretized by GEM,
//! with reference samplers for its stationary law on the sphere and the
//! Bakry–Émery curvature diagnostic.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::analysis::{wasserstein_p, EmpiricalMeasure, GroundMetric};
use crate::error::{Error, Result};
use crate::exec::PathExecutor;
use crate::geometry::{check_on_manifold, check_tangent, fd_step, GeodesicIntegratorConfig, Manifold};
use crate::linalg::{Matrix, Vector};
use crate::rng::{self, Stream};
use crate::schemes::{DriftField, Integrator};

/// A potential `φ`, given as a function on ambient points.
pub trait Potential: Send + Sync {
    fn value(&self, x: &Vector) -> f64;

    /// Ambient gradient of `φ`; central differences by default.
    fn ambient_gradient(&self, x: &Vector) -> Vector {
        let eps = fd_step(x);
        Vector::from_fn(x.len(), |i| {
            let e = Vector::basis(x.len(), i);
            (self.value(&x.axpy(eps, &e)) - self.value(&x.axpy(-eps, &e))) / (2.0 * eps)
        })
    }

    fn label(&self) -> &str;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroPotential;

impl Potential for ZeroPotential {
    fn value(&self, _x: &Vector) -> f64 {
        0.0
    }
    fn ambient_gradient(&self, x: &Vector) -> Vector {
        Vector::zeros(x.len())
    }
    fn label(&self) -> &str {
        "zero"
    }
}

/// `φ(x) = −κ⟨a, x⟩`; on the sphere its Gibbs law is von Mises–Fisher.
#[derive(Debug, Clone, Copy)]
pub struct LinearPotential {
    pub direction: Vector,
    pub kappa: f64,
}

impl Potential for LinearPotential {
    fn value(&self, x: &Vector) -> f64 {
        -self.kappa * self.direction.dot(x)
    }
    fn ambient_gradient(&self, _x: &Vector) -> Vector {
        self.direction.scale(-self.kappa)
    }
    fn label(&self) -> &str {
        "linear"
    }
}

/// `φ(x) = ½ xᵀ A x` for symmetric `A`.
#[derive(Debug, Clone)]
pub struct QuadraticPotential {
    pub matrix: Matrix,
}

impl Potential for QuadraticPotential {
    fn value(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&self.matrix.mul_vec(x))
    }
    fn ambient_gradient(&self, x: &Vector) -> Vector {
        self.matrix.mul_vec(x)
    }
    fn label(&self) -> &str {
        "quadratic"
    }
}

/// The drift `−½ P(x) ∇φ(x)`.
pub struct LangevinDrift<'a> {
    pub potential: &'a dyn Potential,
}

impl DriftField for LangevinDrift<'_> {
    fn drift(&self, manifold: &dyn Manifold, _t: f64, x: &Vector) -> Vector {
        manifold.project_tangent(x, &self.potential.ambient_gradient(x)).scale(-0.5)
    }
}

/// Checked `−½ P(x) ∇φ(x)`.
pub fn rld_drift(m: &dyn Manifold, pot: &dyn Potential, x: &Vector) -> Result<Vector> {
    check_on_manifold(m, x)?;
    let d = LangevinDrift { potential: pot }.drift(m, 0.0, x);
    if !d.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub horizon: f64,
    pub step: f64,
    pub n_paths: usize,
    /// Fraction of `[0, T]` discarded before the ergodic average.
    pub burn_in: f64,
    pub seed: u64,
    /// Times at which the whole cloud is recorded.
    pub checkpoints: Vec<f64>,
}

impl SamplerConfig {
    pub fn new(horizon: f64, step: f64, n_paths: usize, seed: u64) -> Result<Self> {
        let cfg = SamplerConfig { horizon, step, n_paths, burn_in: 0.25, seed, checkpoints: Vec::new() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.step).round() as usize
    }

    fn step_index(&self, t: f64) -> Result<usize> {
        let k = (t / self.step).round();
        if !(k >= 1.0) || (k * self.step - t).abs() > 1e-9 * self.horizon || k as usize > self.steps() {
            return Err(Error::InvalidParameter { name: "checkpoints" });
        }
        Ok(k as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !(self.step <= self.horizon) || !self.horizon.is_finite() {
            return Err(Error::InvalidParameter { name: "step" });
        }
        let steps = self.steps();
        if (steps as f64 * self.step - self.horizon).abs() > 1e-9 * self.horizon {
            return Err(Error::InvalidParameter { name: "horizon" });
        }
        if self.n_paths == 0 {
            return Err(Error::InvalidParameter { name: "n_paths" });
        }
        if !(0.0..1.0).contains(&self.burn_in) {
            return Err(Error::InvalidParameter { name: "burn_in" });
        }
        for &t in &self.checkpoints {
            self.step_index(t)?;
        }
        Ok(())
    }
}

/// Output of [`sample_rld`].
#[derive(Debug, Clone)]
pub struct RldSample {
    pub terminal: EmpiricalMeasure,
    /// `(t, cloud at t)` for each configured checkpoint.
    pub checkpoints: Vec<(f64, EmpiricalMeasure)>,
    /// Average of all post-burn-in states over all paths.
    pub ergodic_mean: Vector,
    /// Largest membership residual seen.
    pub max_residual: f64,
}

struct PathRecord {
    terminal: Vector,
    checkpoints: Vec<Vector>,
    tail_sum: Vector,
    tail_count: usize,
    max_residual: f64,
}

/// GEM discretization of RLD from `x0`; path `i` draws `ΔW = √h ξ` from
/// substream `i` of `cfg.seed`.
pub fn sample_rld<E: PathExecutor>(
    m: &dyn Manifold,
    pot: &dyn Potential,
    x0: &Vector,
    cfg: &SamplerConfig,
    exec: &E,
) -> Result<RldSample> {
    cfg.validate()?;
    check_on_manifold(m, x0)?;
    let drift = LangevinDrift { potential: pot };
    let integ = Integrator::new(m, &drift).with_geodesic(GeodesicIntegratorConfig::default());
    let steps = cfg.steps();
    let h = cfg.step;
    let marks: Vec<usize> = cfg.checkpoints.iter().map(|&t| cfg.step_index(t)).collect::<Result<_>>()?;
    let burn = (cfg.burn_in * steps as f64).floor() as usize;
    let n = m.ambient_dim();
    let records = exec.map(cfg.n_paths, |i| -> Result<PathRecord> {
        let mut stream = rng::substream(cfg.seed, i as u64);
        let mut x = *x0;
        let mut rec = PathRecord {
            terminal: x,
            checkpoints: Vec::with_capacity(marks.len()),
            tail_sum: Vector::zeros(n),
            tail_count: 0,
            max_residual: 0.0,
        };
        for k in 0..steps {
            let dw = rng::gaussian_vector(&mut stream, n).scale(h.sqrt());
            x = integ.gem_step(k as f64 * h, &x, h, &dw).map_err(|e| e.at_step(k))?;
            rec.max_residual = rec.max_residual.max(m.residual(&x));
            let done = k + 1;
            for &mk in &marks {
                if mk == done {
                    rec.checkpoints.push(x);
                }
            }
            if done > burn {
                rec.tail_sum += x;
                rec.tail_count += 1;
            }
        }
        rec.terminal = x;
        Ok(rec)
    });
    let records = records.into_iter().collect::<Result<Vec<_>>>()?;
    let terminal = EmpiricalMeasure::new(records.iter().map(|r| r.terminal).collect())?;
    let checkpoints = cfg
        .checkpoints
        .iter()
        .enumerate()
        .map(|(j, &t)| Ok((t, EmpiricalMeasure::new(records.iter().map(|r| r.checkpoints[j]).collect())?)))
        .collect::<Result<Vec<_>>>()?;
    let count: usize = records.iter().map(|r| r.tail_count).sum();
    let sum = records.iter().fold(Vector::zeros(n), |acc, r| acc + r.tail_sum);
    Ok(RldSample {
        terminal,
        checkpoints,
        ergodic_mean: sum.scale(1.0 / count.max(1) as f64),
        max_residual: records.iter().map(|r| r.max_residual).fold(0.0, f64::max),
    })
}

/// Uniform point on the unit sphere of `ℝⁿ` (normalized Gaussian).
pub fn uniform_sphere<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vector {
    loop {
        let g = rng::gaussian_vector(rng, n);
        let r = g.norm();
        if r > 0.0 {
            return g.scale(1.0 / r);
        }
    }
}

/// Von Mises–Fisher sample on `S²` with mean direction `a` (unit) and
/// concentration `κ > 0`: `t = ⟨a, X⟩` by inverting its CDF, azimuth uniform.
pub fn von_mises_fisher_s2<R: Rng + ?Sized>(a: &Vector, kappa: f64, rng: &mut R) -> Vector {
    let u: f64 = rng.random();
    // t = log(e^{−κ} + u (e^κ − e^{−κ})) / κ, rearranged to avoid overflow.
    let t = (1.0 + (u + (1.0 - u) * (-2.0 * kappa).exp()).ln() / kappa).clamp(-1.0, 1.0);
    let phi = 2.0 * core::f64::consts::PI * rng.random::<f64>();
    let (b1, b2) = orthonormal_complement(a);
    let s = (1.0 - t * t).max(0.0).sqrt();
    a.scale(t).axpy(s * phi.cos(), &b1).axpy(s * phi.sin(), &b2)
}

/// `E⟨a, X⟩ = coth κ − 1/κ` under von Mises–Fisher on `S²`.
pub fn vmf_mean_cosine(kappa: f64) -> f64 {
    1.0 / kappa.tanh() - 1.0 / kappa
}

fn orthonormal_complement(a: &Vector) -> (Vector, Vector) {
    let pick = if a[0].abs() < 0.9 { Vector::basis(3, 0) } else { Vector::basis(3, 1) };
    let b1 = pick.axpy(-a.dot(&pick), a);
    let b1 = b1.scale(1.0 / b1.norm());
    let b2 =
        Vector::from_slice(&[a[1] * b1[2] - a[2] * b1[1], a[2] * b1[0] - a[0] * b1[2], a[0] * b1[1] - a[1] * b1[0]]);
    (b1, b2)
}

/// Step for the second difference along geodesics.
pub const HESSIAN_STEP: f64 = 1e-3;

/// `min [ric(x, u) + ∇²φ(x)(u, u)]` over `(x, u)` samples, with `u` unit
/// tangent. The Hessian term is the second difference of `φ` along the
/// geodesic `exp_x(t u)`; `ric` is the closed-form Ricci curvature when the
/// manifold has one and `−2(m−1)κ₁²` otherwise.
pub fn bakry_emery_diagnostic(m: &dyn Manifold, pot: &dyn Potential, samples: &[(Vector, Vector)]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::TooFewEntries { needed: 1, got: 0 });
    }
    let cfg = GeodesicIntegratorConfig::default();
    let t = HESSIAN_STEP;
    let mut lambda = f64::INFINITY;
    for (x, u) in samples {
        check_on_manifold(m, x)?;
        check_tangent(m, x, u)?;
        if (u.norm() - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidParameter { name: "direction" });
        }
        let ric = match m.ricci_curvature(x, u) {
            Some(r) => r,
            None => {
                let k1 = m.curvature_bounds().ok_or(Error::MissingCurvatureBound)?.kappa1;
                -2.0 * (m.dim() as f64 - 1.0) * k1 * k1
            }
        };
        let fwd = pot.value(&m.exp_map(x, &u.scale(t), &cfg)?);
        let bwd = pot.value(&m.exp_map(x, &u.scale(-t), &cfg)?);
        let hess = (fwd - 2.0 * pot.value(x) + bwd) / (t * t);
        lambda = lambda.min(ric + hess);
    }
    Ok(lambda)
}

/// W₂ between the sampler cloud and an independent target cloud over time.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingProfile {
    pub times: Vec<f64>,
    pub distance: Vec<f64>,
    pub stderr: Vec<f64>,
    /// W₂ between two independent target clouds of the same size.
    pub baseline: f64,
    pub baseline_stderr: f64,
    pub replicates: usize,
}

impl MixingProfile {
    /// Each later distance exceeds the previous by at most `k` standard
    /// errors of their difference.
    pub fn nonincreasing_within(&self, k: f64) -> bool {
        (1..self.times.len()).all(|j| {
            let se = (self.stderr[j].powi(2) + self.stderr[j - 1].powi(2)).sqrt();
            self.distance[j] <= self.distance[j - 1] + k * se
        })
    }
}

/// Runs `replicates` independent samplers (seeds derived from `cfg.seed`),
/// comparing the cloud at each checkpoint to a fresh target cloud drawn by
/// `target`. Means and standard errors are over replicates.
pub fn mixing_profile<E, T>(
    m: &dyn Manifold,
    pot: &dyn Potential,
    x0: &Vector,
    cfg: &SamplerConfig,
    replicates: usize,
    metric: GroundMetric,
    target: T,
    exec: &E,
) -> Result<MixingProfile>
where
    E: PathExecutor,
    T: Fn(&mut Stream) -> Vector + Sync,
{
    if replicates < 2 {
        return Err(Error::InvalidParameter { name: "replicates" });
    }
    let target_seed = rng::splitmix64(cfg.seed ^ 0x7461_7267_6574);
    let cloud = |index: u64| {
        let mut s = rng::substream(target_seed, index);
        EmpiricalMeasure::new((0..cfg.n_paths).map(|_| target(&mut s)).collect())
    };
    let mut rows = Vec::with_capacity(replicates);
    let mut base = Vec::with_capacity(replicates);
    for r in 0..replicates {
        let rcfg = SamplerConfig { seed: rng::substream_seed(cfg.seed, r as u64), ..cfg.clone() };
        let sample = sample_rld(m, pot, x0, &rcfg, exec)?;
        let a = cloud(2 * r as u64)?;
        let b = cloud(2 * r as u64 + 1)?;
        let dists =
            sample.checkpoints.iter().map(|(_, c)| wasserstein_p(c, &a, 2, metric)).collect::<Result<Vec<_>>>()?;
        rows.push(dists);
        base.push(wasserstein_p(&a, &b, 2, metric)?);
    }
    let stats = |xs: &[f64]| {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    };
    let mut distance = Vec::new();
    let mut stderr = Vec::new();
    for j in 0..cfg.checkpoints.len() {
        let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        let (mu, se) = stats(&col);
        distance.push(mu);
        stderr.push(se);
    }
    let (baseline, baseline_stderr) = stats(&base);
    Ok(MixingProfile { times: cfg.checkpoints.clone(), distance, stderr, baseline, baseline_stderr, replicates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::manifolds::{LevelSet, Sphere};
    use crate::schemes::gem_step;

    fn v3(a: f64, b: f64, c: f64) -> Vector {
        Vector::from_slice(&[a, b, c])
    }

    fn vmf() -> LinearPotential {
        LinearPotential { direction: v3(0.0, 0.0, 1.0), kappa: 4.0 }
    }

    #[test]
    fn drift_examples() {
        let s = Sphere::new(3).unwrap();
        let x = v3(1.0, 0.0, 0.0);
        assert_eq!(rld_drift(&s, &ZeroPotential, &x).unwrap(), Vector::zeros(3));
        let d = rld_drift(&s, &vmf(), &x).unwrap();
        assert!((d - v3(0.0, 0.0, 2.0)).norm() < 1e-15);
        let y = v3(0.6, 0.0, 0.8);
        let d = rld_drift(&s, &vmf(), &y).unwrap();
        assert!((s.project_tangent(&y, &d) - d).norm() <= 1e-10);
        assert!(rld_drift(&s, &vmf(), &v3(2.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn default_gradient_matches_analytic() {
        struct Fd(LinearPotential);
        impl Potential for Fd {
            fn value(&self, x: &Vector) -> f64 {
                self.0.value(x)
            }
            fn label(&self) -> &str {
                "fd"
            }
        }
        let x = v3(0.3, -0.4, 0.5);
        let g = Fd(vmf()).ambient_gradient(&x);
        assert!((g - vmf().ambient_gradient(&x)).norm() < 1e-9);
    }

    #[test]
    fn riemannian_gradient_matches_geodesic_differences() {
        let t = LevelSet::torus(2.0, 0.5).unwrap();
        let q = QuadraticPotential { matrix: Matrix::from_fn(3, 3, |i, j| if i == j { 1.0 + i as f64 } else { 0.2 }) };
        let cfg = GeodesicIntegratorConfig::default();
        let x = t.nearest_point(&v3(1.0, 2.0, 0.3)).unwrap();
        let grad = t.project_tangent(&x, &q.ambient_gradient(&x));
        for e in t.tangent_basis(&x).as_slice() {
            let eps = 1e-4;
            let fd = (q.value(&t.exp_map(&x, &e.scale(eps), &cfg).unwrap())
                - q.value(&t.exp_map(&x, &e.scale(-eps), &cfg).unwrap()))
                / (2.0 * eps);
            assert!((fd - grad.dot(e)).abs() <= 1e-5 * grad.norm().max(1.0), "{fd} vs {}", grad.dot(e));
        }
    }

    #[test]
    fn single_step_sampler_is_one_gem_step() {
        let s = Sphere::new(3).unwrap();
        let pot = vmf();
        let cfg = SamplerConfig::new(0.125, 0.125, 1, 17).unwrap();
        let x0 = v3(1.0, 0.0, 0.0);
        let out = sample_rld(&s, &pot, &x0, &cfg, &Sequential).unwrap();
        let dw = rng::gaussian_vector(&mut rng::substream(17, 0), 3).scale(0.125f64.sqrt());
        let drift = LangevinDrift { potential: &pot };
        let expect = gem_step(&s, &drift, &GeodesicIntegratorConfig::default(), 0.0, &x0, 0.125, &dw).unwrap();
        assert_eq!(out.terminal.points()[0], expect);
    }

    #[test]
    fn sampler_config_validation() {
        assert!(SamplerConfig::new(1.0, 2.0, 4, 0).is_err());
        assert!(SamplerConfig::new(1.0, 0.3, 4, 0).is_err());
        assert!(SamplerConfig::new(1.0, 0.25, 0, 0).is_err());
        let mut c = SamplerConfig::new(1.0, 0.25, 4, 0).unwrap();
        c.checkpoints = alloc::vec![0.5, 1.0];
        assert!(c.validate().is_ok());
        c.checkpoints = alloc::vec![0.3];
        assert!(c.validate().is_err());
        c.checkpoints = alloc::vec![2.0];
        assert!(c.validate().is_err());
    }

    /// `∫ t e^{κt} dt / ∫ e^{κt} dt` on `[−1, 1]` by composite Simpson.
    fn vmf_mean_by_quadrature(kappa: f64) -> f64 {
        let n = 20_000;
        let h = 2.0 / n as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..=n {
            let t = -1.0 + i as f64 * h;
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            num += w * t * (kappa * t).exp();
            den += w * (kappa * t).exp();
        }
        num / den
    }

    #[test]
    fn vmf_closed_form_matches_quadrature() {
        for kappa in [0.5, 1.0, 4.0, 10.0] {
            assert!((vmf_mean_cosine(kappa) - vmf_mean_by_quadrature(kappa)).abs() < 1e-12);
        }
    }

    #[test]
    fn vmf_sampler_matches_oracle() {
        let a = v3(0.0, 0.6, 0.8);
        let mut r = rng::stream(5);
        let n = 200_000;
        let ts: Vec<f64> = (0..n).map(|_| von_mises_fisher_s2(&a, 4.0, &mut r)).map(|x| x.dot(&a)).collect();
        let mean = ts.iter().sum::<f64>() / n as f64;
        let var = ts.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / n as f64;
        assert!((mean - vmf_mean_by_quadrature(4.0)).abs() <= 4.0 * (var / n as f64).sqrt());
        let x = von_mises_fisher_s2(&a, 4.0, &mut r);
        assert!((x.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bakry_emery_on_sphere() {
        let s = Sphere::new(3).unwrap();
        let mut r = rng::stream(2);
        let samples: Vec<(Vector, Vector)> = (0..20)
            .map(|_| {
                let x = uniform_sphere(3, &mut r);
                let u = s.project_tangent(&x, &rng::gaussian_vector(&mut r, 3));
                (x, u.scale(1.0 / u.norm()))
            })
            .collect();
        let flat = bakry_emery_diagnostic(&s, &ZeroPotential, &samples).unwrap();
        assert!((flat - 1.0).abs() < 1e-12);
        // Linear φ = −κ⟨a, x⟩ has ∇²φ = κ⟨a, x⟩ g on the unit sphere.
        let pot = vmf();
        for (x, u) in &samples {
            let one = [(*x, *u)];
            let est = bakry_emery_diagnostic(&s, &pot, &one).unwrap() - 1.0;
            assert!((est - 4.0 * x[2]).abs() <= 1e-4, "{est} vs {}", 4.0 * x[2]);
        }
        // φ = −½x₃² is geodesically convex in directions with |u₃| ≤ |x₃|.
        let q = QuadraticPotential { matrix: Matrix::from_fn(3, 3, |i, j| if i == 2 && j == 2 { -1.0 } else { 0.0 }) };
        let convex: Vec<(Vector, Vector)> = samples.iter().copied().filter(|(x, u)| u[2].abs() <= x[2].abs()).collect();
        assert!(!convex.is_empty());
        let base = bakry_emery_diagnostic(&s, &ZeroPotential, &convex).unwrap();
        assert!(bakry_emery_diagnostic(&s, &q, &convex).unwrap() >= base - 1e-6);
    }

    #[test]
    fn bakry_emery_falls_back_to_curvature_bound() {
        let t = LevelSet::torus(2.0, 0.5).unwrap();
        let x = v3(2.5, 0.0, 0.0);
        let u = v3(0.0, 1.0, 0.0);
        let lam = bakry_emery_diagnostic(&t, &ZeroPotential, &[(x, u)]).unwrap();
        assert!((lam + 2.0 * 4.0).abs() < 1e-9);
        assert!(bakry_emery_diagnostic(&t, &ZeroPotential, &[(x, u.scale(2.0))]).is_err());
    }
}
