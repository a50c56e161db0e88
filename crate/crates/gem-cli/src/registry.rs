//! Named manifolds, potentials and drifts built from configuration.

use gem_core::geometry::{check_on_manifold, Manifold};
use gem_core::manifolds::{GraphManifold, LevelSet, Paraboloid, SineGraph, Sphere};
use gem_core::rld::{uniform_sphere, LangevinDrift, LinearPotential, Potential, QuadraticPotential, ZeroPotential};
use gem_core::rng::Stream;
use gem_core::schemes::{DriftField, ProjectedConstant, ZeroDrift};
use gem_core::{Matrix, Vector};
use rand::Rng;

use crate::config::{Config, ConfigError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Sphere,
    Circle,
    Torus,
    Paraboloid,
    Sine,
    LevelSetSphere,
}

impl Family {
    pub const NAMES: [&'static str; 6] =
        ["sphere", "circle", "torus", "graph-paraboloid", "graph-sine", "levelset-sphere"];

    pub fn from_name(name: &str) -> Option<Family> {
        Some(match name {
            "sphere" => Family::Sphere,
            "circle" => Family::Circle,
            "torus" => Family::Torus,
            "graph-paraboloid" => Family::Paraboloid,
            "graph-sine" => Family::Sine,
            "levelset-sphere" => Family::LevelSetSphere,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Sphere => "sphere",
            Family::Circle => "circle",
            Family::Torus => "torus",
            Family::Paraboloid => "graph-paraboloid",
            Family::Sine => "graph-sine",
            Family::LevelSetSphere => "levelset-sphere",
        }
    }

    pub fn is_level_set(self) -> bool {
        matches!(self, Family::Circle | Family::Torus | Family::LevelSetSphere)
    }

    pub fn is_round_sphere(self) -> bool {
        matches!(self, Family::Sphere | Family::Circle | Family::LevelSetSphere)
    }
}

/// A built manifold with the parameters needed to sample points on it.
pub struct Surface {
    pub family: Family,
    pub manifold: Box<dyn Manifold>,
    major: f64,
    minor: f64,
    a: f64,
}

fn core_err(key: &str) -> impl Fn(gem_core::Error) -> ConfigError + '_ {
    move |e| ConfigError::new(key, e.to_string())
}

impl Surface {
    pub fn build(family: Family, cfg: &Config) -> Result<Surface, ConfigError> {
        let n = cfg.usize_or("manifold.n", 3)?;
        let (major, minor) = (cfg.real_or("manifold.R", 2.0), cfg.real_or("manifold.r", 0.5));
        let a = cfg.real_or("manifold.a", 0.5);
        let m = cfg.usize_or("manifold.m", 2)?;
        let manifold: Box<dyn Manifold> = match family {
            Family::Sphere => Box::new(Sphere::new(n).map_err(core_err("manifold.n"))?),
            Family::Circle => Box::new(LevelSet::circle()),
            Family::Torus => Box::new(LevelSet::torus(major, minor).map_err(core_err("manifold.R"))?),
            Family::Paraboloid => {
                if a == 0.0 {
                    return Err(ConfigError::new("manifold.a", "must be non-zero"));
                }
                Box::new(GraphManifold::new(Paraboloid { m, a }.spec()).map_err(core_err("manifold.m"))?)
            }
            Family::Sine => Box::new(GraphManifold::new(SineGraph.spec()).map_err(core_err("manifold.name"))?),
            Family::LevelSetSphere => Box::new(LevelSet::sphere(n).map_err(core_err("manifold.n"))?),
        };
        Ok(Surface { family, manifold, major, minor, a })
    }

    /// The manifold named by `manifold.name` (default `sphere`).
    pub fn from_config(cfg: &Config) -> Result<Surface, ConfigError> {
        let name = cfg.text_or("manifold.name", "sphere");
        let family = Family::from_name(name).ok_or_else(|| {
            ConfigError::new(
                "manifold.name",
                format!("unknown manifold `{name}` (known: {})", Family::NAMES.join(", ")),
            )
        })?;
        Surface::build(family, cfg)
    }

    pub fn ambient_dim(&self) -> usize {
        self.manifold.ambient_dim()
    }

    /// A convenient start point: `e₀` on spheres, the outer equator of the
    /// torus, the origin of a graph.
    pub fn default_point(&self) -> Vector {
        let n = self.ambient_dim();
        match self.family {
            Family::Sphere | Family::Circle | Family::LevelSetSphere => Vector::basis(n, 0),
            Family::Torus => Vector::from_slice(&[self.major + self.minor, 0.0, 0.0]),
            Family::Paraboloid | Family::Sine => Vector::zeros(n),
        }
    }

    /// A random point: uniform on spheres, uniform angles on the torus,
    /// base point uniform in `[−0.7, 0.7]ᵐ` for the paraboloid and in
    /// `[−3, 3]` for the sine graph.
    pub fn random_point(&self, r: &mut Stream) -> Vector {
        let n = self.ambient_dim();
        match self.family {
            Family::Sphere | Family::Circle | Family::LevelSetSphere => uniform_sphere(n, r),
            Family::Torus => {
                let (t, p) = (r.random::<f64>() * std::f64::consts::TAU, r.random::<f64>() * std::f64::consts::TAU);
                let rho = self.major + self.minor * p.cos();
                Vector::from_slice(&[rho * t.cos(), rho * t.sin(), self.minor * p.sin()])
            }
            Family::Paraboloid => {
                let m = n - 1;
                let base = Vector::from_fn(m, |_| 1.4 * r.random::<f64>() - 0.7);
                Vector::from_fn(n, |i| if i < m { base[i] } else { self.a * base.norm_squared() })
            }
            Family::Sine => {
                let t = 6.0 * r.random::<f64>() - 3.0;
                Vector::from_slice(&[t, t.sin()])
            }
        }
    }

    /// `key` as a point on the manifold, or `default`.
    pub fn point_or(&self, cfg: &Config, key: &str, default: Vector) -> Result<Vector, ConfigError> {
        let Some(xs) = cfg.reals(key) else {
            return Ok(default);
        };
        let x = self.vector(key, &xs)?;
        check_on_manifold(self.manifold.as_ref(), &x).map_err(core_err(key))?;
        Ok(x)
    }

    fn vector(&self, key: &str, xs: &[f64]) -> Result<Vector, ConfigError> {
        let n = self.ambient_dim();
        if xs.len() != n {
            return Err(ConfigError::new(key, format!("expected {n} components, got {}", xs.len())));
        }
        Ok(Vector::from_slice(xs))
    }
}

#[derive(Debug, Clone)]
pub enum PotentialChoice {
    Zero,
    /// Unit direction `a` and concentration `κ`.
    Linear {
        direction: Vector,
        kappa: f64,
    },
    Quadratic(Matrix),
}

impl PotentialChoice {
    pub fn from_config(cfg: &Config, surface: &Surface, default: &str) -> Result<PotentialChoice, ConfigError> {
        let n = surface.ambient_dim();
        match cfg.text_or("potential.name", default) {
            "zero" => Ok(PotentialChoice::Zero),
            "linear" => {
                let direction = match cfg.reals("potential.direction") {
                    Some(xs) => surface.vector("potential.direction", &xs)?,
                    None => Vector::basis(n, n - 1),
                };
                let len = direction.norm();
                if !(len > 0.0) {
                    return Err(ConfigError::new("potential.direction", "must be non-zero"));
                }
                let kappa = cfg.real_or("potential.kappa", 4.0);
                Ok(PotentialChoice::Linear { direction: direction.scale(1.0 / len), kappa })
            }
            "quadratic" => {
                let xs = cfg
                    .reals("potential.matrix")
                    .ok_or_else(|| ConfigError::new("potential.matrix", "required for the quadratic potential"))?;
                if xs.len() != n * n {
                    return Err(ConfigError::new(
                        "potential.matrix",
                        format!("expected {} entries, got {}", n * n, xs.len()),
                    ));
                }
                let a = Matrix::from_fn(n, n, |i, j| xs[i * n + j]);
                if a.sub(&a.transpose()).max_abs() > 1e-12 * (1.0 + a.max_abs()) {
                    return Err(ConfigError::new("potential.matrix", "must be symmetric"));
                }
                Ok(PotentialChoice::Quadratic(a))
            }
            other => Err(ConfigError::new(
                "potential.name",
                format!("unknown potential `{other}` (known: zero, linear, quadratic)"),
            )),
        }
    }

    pub fn build(&self) -> Box<dyn Potential> {
        match self {
            PotentialChoice::Zero => Box::new(ZeroPotential),
            PotentialChoice::Linear { direction, kappa } => {
                Box::new(LinearPotential { direction: *direction, kappa: *kappa })
            }
            PotentialChoice::Quadratic(a) => Box::new(QuadraticPotential { matrix: a.clone() }),
        }
    }
}

/// The drift of a simulation: none, a projected constant, or the Langevin
/// drift `−½P∇φ` of a potential.
pub enum DriftChoice {
    Zero,
    Constant(Vector),
    Langevin(Box<dyn Potential>),
}

impl DriftChoice {
    pub fn from_config(cfg: &Config, surface: &Surface) -> Result<DriftChoice, ConfigError> {
        match cfg.text_or("drift.name", "langevin") {
            "zero" => Ok(DriftChoice::Zero),
            "constant" => {
                let xs = cfg
                    .reals("drift.direction")
                    .ok_or_else(|| ConfigError::new("drift.direction", "required for the constant drift"))?;
                Ok(DriftChoice::Constant(surface.vector("drift.direction", &xs)?))
            }
            "langevin" => Ok(DriftChoice::Langevin(PotentialChoice::from_config(cfg, surface, "linear")?.build())),
            other => Err(ConfigError::new(
                "drift.name",
                format!("unknown drift `{other}` (known: zero, constant, langevin)"),
            )),
        }
    }

    pub fn field(&self) -> Box<dyn DriftField + '_> {
        match self {
            DriftChoice::Zero => Box::new(ZeroDrift),
            DriftChoice::Constant(c) => Box::new(ProjectedConstant { direction: *c }),
            DriftChoice::Langevin(p) => Box::new(LangevinDrift { potential: p.as_ref() }),
        }
    }
}
