//! The experiment kinds behind each subcommand.

use std::fmt::Write as _;

use gem_core::analysis::{
    coupling_discrepancy_curve, fit_order, one_step_bias, strong_error_curve, CurveEntry, CurveSetup, ErrorCurve,
    ErrorKind, GroundMetric, OrderFit,
};
use gem_core::geometry::{self, generic, GeodesicIntegratorConfig, Manifold};
use gem_core::rld::{mixing_profile, sample_rld, uniform_sphere, vmf_mean_cosine, von_mises_fisher_s2, SamplerConfig};
use gem_core::schemes::Integrator;
use gem_core::{rng, Matrix, Vector};
use rand::Rng;

use crate::config::{Config, ConfigError, Experiment};
use gem_core::exec::PathExecutor;

use crate::exec::Threaded;
use crate::output::{curves_csv, real, Check};
use crate::registry::{DriftChoice, Family, PotentialChoice, Surface};
use crate::RunError;

/// Files to write (name, contents), checks, and human-readable notes.
#[derive(Debug, Default)]
pub struct Report {
    pub files: Vec<(String, String)>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

pub fn execute(exp: Experiment, cfg: &Config, exec: &Threaded) -> Result<Report, RunError> {
    match exp {
        Experiment::GeometryCheck => geometry_check(cfg, exec),
        Experiment::Convergence => rate_curves(cfg, exec, false),
        Experiment::Coupling => rate_curves(cfg, exec, true),
        Experiment::OneStepBias => bias(cfg, exec),
        Experiment::RldSample => rld_sample(cfg, exec),
        Experiment::RldMixing => rld_mixing(cfg, exec),
        Experiment::Selftest => selftest(cfg),
    }
}

fn core(context: impl Into<String>) -> impl FnOnce(gem_core::Error) -> RunError {
    let context = context.into();
    move |source| RunError::Core { context, source }
}

fn seed(cfg: &Config) -> u64 {
    cfg.uint_or("seed", 42)
}

/// Level exponents `e` (step `2⁻ᵉ`), ascending, at least four of them.
fn exponents(cfg: &Config) -> Result<Vec<i32>, ConfigError> {
    let exps = cfg.ints("levels").unwrap_or_else(|| (4..=9).collect());
    if exps.len() < 4 {
        return Err(ConfigError::new("levels", "at least 4 levels are needed for a rate fit"));
    }
    if exps.iter().any(|&e| !(0..=24).contains(&e)) || exps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ConfigError::new("levels", "exponents must be strictly increasing and within 0..=24"));
    }
    Ok(exps)
}

fn n_paths(cfg: &Config, default: usize) -> Result<usize, ConfigError> {
    let n = cfg.usize_or("n_paths", default)?;
    if n < ErrorCurve::MIN_PATHS {
        return Err(ConfigError::new("n_paths", format!("at least {} paths are needed", ErrorCurve::MIN_PATHS)));
    }
    Ok(n)
}

fn geodesic(cfg: &Config) -> Result<GeodesicIntegratorConfig, ConfigError> {
    let d = GeodesicIntegratorConfig::default();
    let substeps = cfg.uint_or("geodesic.substeps", d.substeps_per_unit as u64);
    let substeps = u32::try_from(substeps).map_err(|_| ConfigError::new("geodesic.substeps", "value too large"))?;
    GeodesicIntegratorConfig::new(substeps, cfg.bool_or("geodesic.reproject", d.reproject), d.tolerance)
        .map_err(|e| ConfigError::new("geodesic.substeps", e.to_string()))
}

fn integrator<'a>(
    cfg: &Config,
    surface: &'a Surface,
    drift: &'a dyn gem_core::schemes::DriftField,
) -> Result<Integrator<'a>, ConfigError> {
    let mut integ = Integrator::new(surface.manifold.as_ref(), drift).with_geodesic(geodesic(cfg)?);
    if cfg.contains("em.r0") {
        integ = integ.with_extension_radius(cfg.positive_or("em.r0", 1.0)?);
    }
    Ok(integ)
}

fn band(cfg: &Config, lo_key: &str, hi_key: &str, (lo, hi): (f64, f64)) -> (f64, f64) {
    (cfg.real_or(lo_key, lo), cfg.real_or(hi_key, hi))
}

fn fit(curve: &ErrorCurve, what: &str) -> Result<OrderFit, RunError> {
    fit_order(curve).map_err(core(format!("rate fit of {what}")))
}

fn fit_note(what: &str, f: &OrderFit) -> String {
    format!("{what}: slope {:.4}, R² {:.5}", f.slope, f.r_squared)
}

/// Strong error against a fine reference (`convergence`) or the GEM–EM
/// discrepancy at equal step (`coupling`), one curve per `p`.
fn rate_curves(cfg: &Config, exec: &Threaded, coupling: bool) -> Result<Report, RunError> {
    let surface = Surface::from_config(cfg)?;
    let drift = DriftChoice::from_config(cfg, &surface)?;
    let field = drift.field();
    let integ = integrator(cfg, &surface, field.as_ref())?;
    let x0 = surface.point_or(cfg, "x0", surface.default_point())?;
    let exps = exponents(cfg)?;
    let finest = *exps.last().expect("at least four levels");
    let reference = if coupling {
        finest
    } else {
        let r = cfg.uint_or("reference", 15);
        if r > 24 || (r as i32) < finest {
            return Err(ConfigError::new("reference", "must be at least the finest level and at most 24").into());
        }
        r as i32
    };
    let horizon = cfg.positive_or("T", 1.0)?;
    let ps = cfg.reals("p").unwrap_or_else(|| if coupling { vec![1.0, 2.0] } else { vec![2.0] });
    if ps.is_empty() || ps.iter().any(|&p| p < 1.0) {
        return Err(ConfigError::new("p", "each moment must be at least 1").into());
    }
    let default_band = match (coupling, surface.family) {
        (true, _) => (0.40, 0.65),
        (false, Family::Torus) => (0.38, 0.65),
        (false, _) => (0.40, 0.62),
    };
    let (lo, hi) = band(cfg, "check.slope_min", "check.slope_max", default_band);
    let noise_se = cfg.real_or("check.noise_se", 2.0);
    let mut setup = CurveSetup {
        integrator: integ,
        x0,
        horizon,
        levels: exps.iter().map(|&e| 1usize << e).collect(),
        reference_steps: 1usize << reference,
        n_paths: n_paths(cfg, 512)?,
        p: ps[0],
        seed: seed(cfg),
    };
    let mut report = Report::default();
    let mut curves = Vec::new();
    let mut slopes = Vec::new();
    for &p in &ps {
        setup.p = p;
        let curve = if coupling {
            coupling_discrepancy_curve(&setup, exec).map_err(core(format!("coupling curve p={p}")))?
        } else {
            strong_error_curve(&setup, exec).map_err(core(format!("strong error curve p={p}")))?
        };
        let f = fit(&curve, &format!("p={p}"))?;
        report.notes.push(fit_note(&format!("{} p={p}", curve.kind().label()), &f));
        report.checks.push(Check::within(format!("slope[p={p}]"), f.slope, lo, hi));
        if !coupling {
            report.checks.push(Check::at_least(
                format!("r_squared[p={p}]"),
                f.r_squared,
                cfg.real_or("check.r2_min", 0.98),
            ));
        }
        report.checks.push(Check::holds(format!("nonincreasing[p={p}]"), curve.nonincreasing_within(noise_se)));
        slopes.push(f.slope);
        curves.push(curve);
    }
    if coupling && slopes.len() >= 2 {
        let spread = slopes.iter().cloned().fold(f64::MIN, f64::max) - slopes.iter().cloned().fold(f64::MAX, f64::min);
        report.checks.push(Check::at_most("slope_spread", spread, cfg.real_or("check.slope_gap", 0.1)));
    }
    let name = if coupling { "coupling" } else { "convergence" };
    report.files.push((format!("{name}.csv"), curves_csv(&curves.iter().collect::<Vec<_>>())));
    Ok(report)
}

/// One-step GEM vs EM mean bias and centered second moment at random points.
fn bias(cfg: &Config, exec: &Threaded) -> Result<Report, RunError> {
    let surface = Surface::from_config(cfg)?;
    let drift = DriftChoice::from_config(cfg, &surface)?;
    let field = drift.field();
    let integ = integrator(cfg, &surface, field.as_ref())?;
    let hs: Vec<f64> = exponents(cfg)?.iter().map(|&e| 2f64.powi(-e)).collect();
    let points = cfg.usize_or("bias.points", 5)?;
    if points == 0 {
        return Err(ConfigError::new("bias.points", "must be positive").into());
    }
    let samples = cfg.usize_or("bias.samples", 100_000)?;
    if samples < ErrorCurve::MIN_PATHS {
        return Err(
            ConfigError::new("bias.samples", format!("at least {} samples are needed", ErrorCurve::MIN_PATHS)).into()
        );
    }
    let (blo, bhi) = band(cfg, "check.bias_min", "check.bias_max", (1.3, 1.7));
    let (clo, chi) = band(cfg, "check.centered_min", "check.centered_max", (1.8, 2.2));
    let seed = seed(cfg);
    let point_seed = rng::splitmix64(seed ^ 0x706f_696e_7473);
    let mut report = Report::default();
    let mut table = String::from("point");
    for j in 0..surface.ambient_dim() {
        let _ = write!(table, ",x{j}");
    }
    table.push('\n');
    for i in 0..points {
        let x = surface.random_point(&mut rng::substream(point_seed, i as u64));
        let (b, c) = one_step_bias(&integ, &x, &hs, samples, rng::substream_seed(seed, i as u64), exec)
            .map_err(core(format!("one-step bias at point {i}")))?;
        let fb = fit(&b, &format!("bias at point {i}"))?;
        let fc = fit(&c, &format!("centered moment at point {i}"))?;
        report.notes.push(fit_note(&format!("point {i} bias"), &fb));
        report.notes.push(fit_note(&format!("point {i} centered"), &fc));
        report.checks.push(Check::within(format!("bias_slope[point {i}]"), fb.slope, blo, bhi));
        report.checks.push(Check::within(format!("centered_slope[point {i}]"), fc.slope, clo, chi));
        let _ = write!(table, "{i}");
        for v in x.iter() {
            let _ = write!(table, ",{}", real(*v));
        }
        table.push('\n');
        report.files.push((format!("one-step-bias-point{i}.csv"), curves_csv(&[&b, &c])));
    }
    report.files.push(("one-step-bias-points.csv".into(), table));
    Ok(report)
}

fn sampler(cfg: &Config, horizon: f64, paths: usize) -> Result<SamplerConfig, ConfigError> {
    let mut sc = SamplerConfig::new(horizon, cfg.positive_or("rld.h", 2f64.powi(-7))?, paths, seed(cfg))
        .map_err(|e| ConfigError::new("rld.h", e.to_string()))?;
    sc.burn_in = cfg.real_or("rld.burn_in", sc.burn_in);
    sc.validate().map_err(|e| ConfigError::new("rld.burn_in", e.to_string()))?;
    Ok(sc)
}

fn is_s2(surface: &Surface) -> bool {
    surface.family.is_round_sphere() && surface.ambient_dim() == 3
}

/// Terminal cloud of the GEM discretization of Riemannian Langevin dynamics.
fn rld_sample(cfg: &Config, exec: &Threaded) -> Result<Report, RunError> {
    let surface = Surface::from_config(cfg)?;
    let choice = PotentialChoice::from_config(cfg, &surface, "linear")?;
    let pot = choice.build();
    let x0 = surface.point_or(cfg, "x0", surface.default_point())?;
    let sc = sampler(cfg, cfg.positive_or("T", 8.0)?, cfg.usize_or("n_paths", 4096)?)?;
    let out = sample_rld(surface.manifold.as_ref(), pot.as_ref(), &x0, &sc, exec).map_err(core("sampler"))?;
    let n = surface.ambient_dim();
    let mut csv = String::from("path");
    for j in 0..n {
        let _ = write!(csv, ",x{j}");
    }
    csv.push('\n');
    for (i, p) in out.terminal.points().iter().enumerate() {
        let _ = write!(csv, "{i}");
        for v in p.iter() {
            let _ = write!(csv, ",{}", real(*v));
        }
        csv.push('\n');
    }
    let mut report = Report::default();
    report.files.push(("rld-sample.csv".into(), csv));
    report.checks.push(Check::at_most("max_residual", out.max_residual, 1e-8));
    let mean = out.terminal.mean();
    report.notes.push(format!("terminal mean {mean:?}, ergodic mean {:?}", out.ergodic_mean));
    match (&choice, surface.family.is_round_sphere()) {
        (PotentialChoice::Linear { direction, kappa }, true) if is_s2(&surface) => {
            let oracle = vmf_mean_cosine(*kappa);
            let got = mean.dot(direction);
            report.notes.push(format!("mean <a,X> = {got:.5}, stationary value {oracle:.5}"));
            report.checks.push(Check::at_most(
                "vmf_mean_error",
                (got - oracle).abs(),
                cfg.real_or("check.tolerance", 0.02),
            ));
        }
        (PotentialChoice::Zero, true) => {
            report.checks.push(Check::at_most("uniform_mean_norm", mean.norm(), cfg.real_or("check.tolerance", 0.05)));
        }
        _ => report.notes.push("no closed-form stationary law for this manifold and potential".into()),
    }
    Ok(report)
}

/// W₂ between sampler clouds at checkpoint times and independent target
/// clouds, against the target–target baseline.
fn rld_mixing(cfg: &Config, exec: &Threaded) -> Result<Report, RunError> {
    let surface = Surface::from_config(cfg)?;
    if !surface.family.is_round_sphere() {
        return Err(
            ConfigError::new("manifold.name", "mixing needs a sphere, where the target law can be sampled").into()
        );
    }
    let choice = PotentialChoice::from_config(cfg, &surface, "linear")?;
    let n = surface.ambient_dim();
    let (target, default_x0): (Box<dyn Fn(&mut rng::Stream) -> Vector + Sync>, Vector) = match &choice {
        PotentialChoice::Zero => (Box::new(move |r: &mut rng::Stream| uniform_sphere(n, r)), surface.default_point()),
        PotentialChoice::Linear { direction, kappa } if n == 3 => {
            let (a, k) = (*direction, *kappa);
            (Box::new(move |r: &mut rng::Stream| von_mises_fisher_s2(&a, k, r)), -a)
        }
        _ => {
            return Err(ConfigError::new(
                "potential.name",
                "mixing targets are uniform (zero) or von Mises-Fisher on S² (linear)",
            )
            .into())
        }
    };
    let pot = choice.build();
    let x0 = surface.point_or(cfg, "x0", default_x0)?;
    let times = cfg.reals("mixing.checkpoints").unwrap_or_else(|| vec![1.0, 2.0, 4.0, 8.0]);
    if times.is_empty() || times[0] <= 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ConfigError::new("mixing.checkpoints", "must be positive and strictly increasing").into());
    }
    let mut sc = sampler(cfg, *times.last().expect("non-empty"), cfg.usize_or("n_paths", 512)?)?;
    sc.checkpoints = times;
    sc.validate().map_err(|e| ConfigError::new("mixing.checkpoints", e.to_string()))?;
    let metric = match cfg.text_or("mixing.metric", "extrinsic") {
        "extrinsic" => GroundMetric::Extrinsic,
        "spherical" => GroundMetric::Spherical,
        other => return Err(ConfigError::new("mixing.metric", format!("unknown metric `{other}`")).into()),
    };
    let replicates = cfg.usize_or("mixing.replicates", 8)?;
    if replicates < 2 {
        return Err(ConfigError::new("mixing.replicates", "at least 2 replicates are needed").into());
    }
    let prof = mixing_profile(surface.manifold.as_ref(), pot.as_ref(), &x0, &sc, replicates, metric, target, exec)
        .map_err(core("mixing profile"))?;
    let mut csv = String::from("t,w2,stderr,baseline,baseline_stderr\n");
    for j in 0..prof.times.len() {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            real(prof.times[j]),
            real(prof.distance[j]),
            real(prof.stderr[j]),
            real(prof.baseline),
            real(prof.baseline_stderr)
        );
    }
    let mut report = Report::default();
    report.files.push(("rld-mixing.csv".into(), csv));
    report.checks.push(Check::holds("nonincreasing", prof.nonincreasing_within(cfg.real_or("check.noise_se", 2.0))));
    let last = *prof.distance.last().expect("non-empty");
    report.checks.push(Check::at_most(
        "final_over_baseline",
        last / prof.baseline,
        cfg.real_or("check.baseline_factor", 2.0),
    ));
    report.notes.push(format!("W2 {:?}, baseline {:.5}", prof.distance, prof.baseline));
    Ok(report)
}

/// Worst defects at one sampled point.
#[derive(Debug, Clone, Copy, Default)]
struct PointDefects {
    symmetry: f64,
    idempotency: f64,
    trace: f64,
    ii_normal: f64,
    ii_symmetry: f64,
    ii_bilinear: f64,
    ito_se_ratio: f64,
    shape: f64,
    level_set_fd: f64,
}

fn random_tangent(m: &dyn Manifold, x: &Vector, r: &mut rng::Stream) -> Vector {
    m.project_tangent(x, &rng::gaussian_vector(r, m.ambient_dim()))
}

/// `‖A(x) − ½ mean II(Pξ, Pξ)‖` over `N` Gaussian draws, in units of the
/// standard error of the mean vector.
fn ito_se_ratio(m: &dyn Manifold, x: &Vector, samples: usize, r: &mut rng::Stream) -> f64 {
    let n = m.ambient_dim();
    let (mut sum, mut sq) = (Vector::zeros(n), Vector::zeros(n));
    for _ in 0..samples {
        let u = random_tangent(m, x, r);
        let q = m.second_fundamental_form(x, &u, &u).scale(0.5);
        sum += q;
        sq += Vector::from_fn(n, |i| q[i] * q[i]);
    }
    let count = samples as f64;
    let mean = sum.scale(1.0 / count);
    let var: f64 = (0..n).map(|i| (sq[i] - count * mean[i] * mean[i]) / (count - 1.0)).sum();
    let se = (var.max(0.0) / count).sqrt();
    let err = (m.ito_correction(x) - mean).norm();
    if se > 0.0 {
        err / se
    } else if err <= 1e-14 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// `max |(I − S_{x,ξ}) Dπ(x + ξ) − P(x)|` with `Dπ` by central differences.
fn shape_defect(m: &dyn Manifold, x: &Vector, r: &mut rng::Stream) -> Result<f64, gem_core::Error> {
    let n = m.ambient_dim();
    let g = rng::gaussian_vector(r, n);
    let normal = g - m.project_tangent(x, &g);
    let reach = m.tubular_radius().min(1.0);
    let xi = normal.scale(0.25 * reach * (2.0 * r.random::<f64>() - 1.0) / normal.norm());
    let y = *x + xi;
    let eps = 1e-5;
    let cols = (0..n)
        .map(|j| {
            let e = Vector::basis(n, j);
            Ok((m.nearest_point(&y.axpy(eps, &e))? - m.nearest_point(&y.axpy(-eps, &e))?).scale(0.5 / eps))
        })
        .collect::<Result<Vec<_>, gem_core::Error>>()?;
    let dpi = Matrix::from_columns(&cols);
    let s = geometry::shape_operator(m, x, &xi)?;
    Ok(Matrix::identity(n).sub(&s).mul(&dpi).sub(&m.projection_matrix(x)).max_abs())
}

fn point_defects(
    surface: &Surface,
    x: &Vector,
    samples: usize,
    r: &mut rng::Stream,
) -> Result<PointDefects, gem_core::Error> {
    let m = surface.manifold.as_ref();
    let p = geometry::tangent_projection(m, x)?;
    let mut d = PointDefects {
        symmetry: p.symmetry_defect(),
        idempotency: p.idempotency_defect(),
        trace: (p.trace() - m.dim() as f64).abs(),
        ..PointDefects::default()
    };
    let (u, w, z) = (random_tangent(m, x, r), random_tangent(m, x, r), random_tangent(m, x, r));
    let scale = u.norm() * w.norm();
    let ii = geometry::second_fundamental_form(m, x, &u, &w)?;
    d.ii_normal = m.project_tangent(x, &ii).norm() / scale;
    d.ii_symmetry = (ii - m.second_fundamental_form(x, &w, &u)).norm() / scale.max(1.0);
    let (a, b) = (1.7, -0.4);
    let lhs = m.second_fundamental_form(x, &u.scale(a).axpy(b, &z), &w);
    let rhs = ii.scale(a).axpy(b, &m.second_fundamental_form(x, &z, &w));
    d.ii_bilinear = (lhs - rhs).norm() / (1.0 + rhs.norm());
    if surface.family.is_level_set() {
        let fd = generic::second_fundamental_form_fd(m, x, &u, &w);
        d.level_set_fd = (ii - fd).norm() / ii.norm().max(scale);
    }
    d.ito_se_ratio = ito_se_ratio(m, x, samples, r);
    d.shape = shape_defect(m, x, r)?;
    Ok(d)
}

/// `max rem / ((κ₁² + κ₂)/6 ‖v‖³)` over random `(x, v)` with `‖v‖ ≤ 0.5`,
/// where `rem = ‖exp_x(v) − x − v − ½II(v, v)‖`.
fn taylor_ratio(surface: &Surface, count: usize, r: &mut rng::Stream) -> Result<Option<f64>, gem_core::Error> {
    let m = surface.manifold.as_ref();
    let Some(kappa2) = m.curvature_bounds().and_then(|cb| cb.kappa2.map(|k2| cb.kappa1 * cb.kappa1 + k2)) else {
        return Ok(None);
    };
    let c = kappa2 / 6.0;
    let cfg = GeodesicIntegratorConfig::default();
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let x = surface.random_point(r);
        let u = random_tangent(m, &x, r);
        let len = 0.5 * r.random::<f64>();
        if len == 0.0 {
            continue;
        }
        let v = u.scale(len / u.norm());
        let taylor = x + v + m.second_fundamental_form(&x, &v, &v).scale(0.5);
        let rem = (geometry::exp_map(m, &x, &v, &cfg)? - taylor).norm();
        worst = worst.max(rem / (c * len.powi(3)));
    }
    Ok(Some(worst))
}

fn geometry_check(cfg: &Config, exec: &Threaded) -> Result<Report, RunError> {
    let names = cfg
        .words("geometry.manifolds")
        .unwrap_or_else(|| ["sphere", "torus", "graph-paraboloid", "levelset-sphere"].map(String::from).to_vec());
    if names.is_empty() {
        return Err(ConfigError::new("geometry.manifolds", "empty list").into());
    }
    let points = cfg.usize_or("geometry.points", 10)?;
    let samples = cfg.usize_or("geometry.samples", 100_000)?;
    let taylor = cfg.usize_or("geometry.taylor", 1000)?;
    if points == 0 || samples < 2 {
        return Err(ConfigError::new("geometry.points", "need at least one point and two samples").into());
    }
    let seed = seed(cfg);
    let mut report = Report::default();
    for (fi, name) in names.iter().enumerate() {
        let family = Family::from_name(name)
            .ok_or_else(|| ConfigError::new("geometry.manifolds", format!("unknown manifold `{name}`")))?;
        let surface = Surface::build(family, cfg)?;
        let family_seed = rng::substream_seed(seed, fi as u64);
        let per_point = exec.map(points, |i| {
            let mut r = rng::substream(family_seed, i as u64);
            let x = surface.random_point(&mut r);
            point_defects(&surface, &x, samples, &mut r)
        });
        let per_point = per_point
            .into_iter()
            .enumerate()
            .map(|(i, d)| d.map_err(core(format!("{name} point {i}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let worst = |f: fn(&PointDefects) -> f64| per_point.iter().map(f).fold(0.0, f64::max);
        let mut add = |check: &str, value: f64, tol: f64| {
            report.checks.push(Check::at_most(format!("{name}.{check}"), value, tol))
        };
        add("projector.symmetry", worst(|d| d.symmetry), 1e-10);
        add("projector.idempotency", worst(|d| d.idempotency), 1e-8);
        add("projector.trace", worst(|d| d.trace), 1e-8);
        add("second_form.normal", worst(|d| d.ii_normal), 1e-6);
        add("second_form.symmetry", worst(|d| d.ii_symmetry), 1e-8);
        add("second_form.bilinearity", worst(|d| d.ii_bilinear), 1e-7);
        add("ito_identity.se_ratio", worst(|d| d.ito_se_ratio), 3.0);
        add("shape_identity", worst(|d| d.shape), 1e-4);
        if family.is_level_set() {
            add("level_set_second_form_fd", worst(|d| d.level_set_fd), 1e-5);
        }
        if family == Family::Sphere {
            let mut r = rng::substream(family_seed, u64::MAX);
            if let Some(ratio) = taylor_ratio(&surface, taylor, &mut r).map_err(core(format!("{name} Taylor check")))? {
                add("taylor_remainder_ratio", ratio, 1.0 + 1e-3);
            }
        }
    }
    let mut csv = String::from("check,value,tolerance,pass\n");
    for c in &report.checks {
        let _ = writeln!(csv, "{},{},{},{}", c.name, real(c.value), real(c.hi.unwrap_or(f64::NAN)), c.pass);
    }
    report.files.push(("geometry-check.csv".into(), csv));
    Ok(report)
}

/// Harness self-test on a synthetic curve `error = h^γ`.
fn selftest(cfg: &Config) -> Result<Report, RunError> {
    let gamma = cfg.real_or("selftest.gamma", 0.5);
    let entries = exponents(cfg)?
        .iter()
        .map(|&e| {
            let h = 2f64.powi(-e);
            CurveEntry { h, error: h.powf(gamma), stderr: 0.0, n_paths: 512 }
        })
        .collect();
    let curve = ErrorCurve::new(ErrorKind::StrongVsReference, 2.0, entries).map_err(core("synthetic curve"))?;
    let f = fit(&curve, "synthetic curve")?;
    let (lo, hi) = band(cfg, "check.slope_min", "check.slope_max", (0.40, 0.62));
    let mut report = Report::default();
    report.notes.push(fit_note(&format!("synthetic h^{gamma}"), &f));
    report.checks.push(Check::within("slope", f.slope, lo, hi));
    report.checks.push(Check::at_least("r_squared", f.r_squared, cfg.real_or("check.r2_min", 0.98)));
    report.files.push(("selftest.csv".into(), curves_csv(&[&curve])));
    Ok(report)
}
