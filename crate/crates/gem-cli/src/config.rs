//! Flat `key=value` experiment configuration.
//!
//! One assignment per line, `#` starts a comment, keys may be dotted
//! (`manifold.R=2.0`). Every key is checked against [`SCHEMA`] when it is
//! set, so typos and malformed values are reported before anything runs.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("config key `{key}`: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { key: key.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Experiment {
    GeometryCheck,
    Convergence,
    Coupling,
    OneStepBias,
    RldSample,
    RldMixing,
    Selftest,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::GeometryCheck,
        Experiment::Convergence,
        Experiment::Coupling,
        Experiment::OneStepBias,
        Experiment::RldSample,
        Experiment::RldMixing,
        Experiment::Selftest,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Experiment::GeometryCheck => "geometry-check",
            Experiment::Convergence => "convergence",
            Experiment::Coupling => "coupling",
            Experiment::OneStepBias => "one-step-bias",
            Experiment::RldSample => "rld-sample",
            Experiment::RldMixing => "rld-mixing",
            Experiment::Selftest => "selftest",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Experiment {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Experiment::ALL.into_iter().find(|e| e.label() == s).ok_or(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Text,
    Uint,
    Real,
    Bool,
    Reals,
    Ints,
    Words,
}

/// Every accepted key and the shape of its value.
const SCHEMA: &[(&str, Kind)] = &[
    ("experiment", Kind::Text),
    ("seed", Kind::Uint),
    ("workers", Kind::Uint),
    ("out", Kind::Text),
    ("manifold.name", Kind::Text),
    ("manifold.n", Kind::Uint),
    ("manifold.R", Kind::Real),
    ("manifold.r", Kind::Real),
    ("manifold.a", Kind::Real),
    ("manifold.m", Kind::Uint),
    ("x0", Kind::Reals),
    ("drift.name", Kind::Text),
    ("drift.direction", Kind::Reals),
    ("potential.name", Kind::Text),
    ("potential.direction", Kind::Reals),
    ("potential.kappa", Kind::Real),
    ("potential.matrix", Kind::Reals),
    ("T", Kind::Real),
    ("levels", Kind::Ints),
    ("reference", Kind::Uint),
    ("n_paths", Kind::Uint),
    ("p", Kind::Reals),
    ("geodesic.substeps", Kind::Uint),
    ("geodesic.reproject", Kind::Bool),
    ("em.r0", Kind::Real),
    ("bias.points", Kind::Uint),
    ("bias.samples", Kind::Uint),
    ("rld.h", Kind::Real),
    ("rld.burn_in", Kind::Real),
    ("mixing.checkpoints", Kind::Reals),
    ("mixing.replicates", Kind::Uint),
    ("mixing.metric", Kind::Text),
    ("geometry.manifolds", Kind::Words),
    ("geometry.points", Kind::Uint),
    ("geometry.samples", Kind::Uint),
    ("geometry.taylor", Kind::Uint),
    ("selftest.gamma", Kind::Real),
    ("check.slope_min", Kind::Real),
    ("check.slope_max", Kind::Real),
    ("check.r2_min", Kind::Real),
    ("check.slope_gap", Kind::Real),
    ("check.bias_min", Kind::Real),
    ("check.bias_max", Kind::Real),
    ("check.centered_min", Kind::Real),
    ("check.centered_max", Kind::Real),
    ("check.tolerance", Kind::Real),
    ("check.noise_se", Kind::Real),
    ("check.baseline_factor", Kind::Real),
];

fn kind_of(key: &str) -> Option<Kind> {
    SCHEMA.iter().find(|(k, _)| *k == key).map(|&(_, kind)| kind)
}

fn split_list(raw: &str) -> impl Iterator<Item = &str> {
    raw.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_real(key: &str, raw: &str) -> Result<f64, ConfigError> {
    let v: f64 = raw.parse().map_err(|_| ConfigError::new(key, format!("`{raw}` is not a number")))?;
    if !v.is_finite() {
        return Err(ConfigError::new(key, format!("`{raw}` is not finite")));
    }
    Ok(v)
}

fn validate(key: &str, kind: Kind, raw: &str) -> Result<(), ConfigError> {
    match kind {
        Kind::Text => {
            if raw.is_empty() {
                return Err(ConfigError::new(key, "empty value"));
            }
        }
        Kind::Uint => {
            raw.parse::<u64>().map_err(|_| ConfigError::new(key, format!("`{raw}` is not a non-negative integer")))?;
        }
        Kind::Real => {
            parse_real(key, raw)?;
        }
        Kind::Bool => {
            parse_bool(key, raw)?;
        }
        Kind::Reals => {
            for item in split_list(raw) {
                parse_real(key, item)?;
            }
        }
        Kind::Ints => {
            for item in split_list(raw) {
                item.parse::<i32>().map_err(|_| ConfigError::new(key, format!("`{item}` is not an integer")))?;
            }
        }
        Kind::Words => {}
    }
    Ok(())
}

fn parse_bool(key: &str, raw: &str) -> Result<bool, ConfigError> {
    match raw {
        "true" | "on" | "1" => Ok(true),
        "false" | "off" | "0" => Ok(false),
        _ => Err(ConfigError::new(key, format!("`{raw}` is not a boolean"))),
    }
}

/// A validated set of assignments. Lookups fall back to caller defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut cfg = Config::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            cfg.assign(line).map_err(|e| {
                if e.key.is_empty() {
                    ConfigError::new(format!("line {}", i + 1), e.message)
                } else {
                    e
                }
            })?;
        }
        Ok(cfg)
    }

    /// Applies one `key=value` assignment, replacing any earlier value.
    pub fn assign(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError::new("", format!("expected key=value, got `{assignment}`")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let kind = kind_of(key).ok_or_else(|| ConfigError::new(key, "unknown key"))?;
        validate(key, kind, value)?;
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn text_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.text(key).unwrap_or(default)
    }

    pub fn uint_or(&self, key: &str, default: u64) -> u64 {
        self.text(key).map_or(default, |raw| raw.parse().expect("validated on insert"))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        usize::try_from(self.uint_or(key, default as u64)).map_err(|_| ConfigError::new(key, "value too large"))
    }

    pub fn real_or(&self, key: &str, default: f64) -> f64 {
        self.text(key).map_or(default, |raw| raw.parse().expect("validated on insert"))
    }

    pub fn bool_or(&self, key: &str, default: bool) -> bool {
        self.text(key).map_or(default, |raw| parse_bool(key, raw).expect("validated on insert"))
    }

    pub fn reals(&self, key: &str) -> Option<Vec<f64>> {
        self.text(key).map(|raw| split_list(raw).map(|s| s.parse().expect("validated on insert")).collect())
    }

    pub fn ints(&self, key: &str) -> Option<Vec<i32>> {
        self.text(key).map(|raw| split_list(raw).map(|s| s.parse().expect("validated on insert")).collect())
    }

    pub fn words(&self, key: &str) -> Option<Vec<String>> {
        self.text(key).map(|raw| split_list(raw).map(String::from).collect())
    }

    /// Checks a positive real, naming the key on failure.
    pub fn positive_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        let v = self.real_or(key, default);
        if v > 0.0 {
            Ok(v)
        } else {
            Err(ConfigError::new(key, format!("must be positive, got {v}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_dotted_keys_and_lists() {
        let cfg = Config::parse("# header\nmanifold.name = torus\nmanifold.R=2.0 # major\n\nlevels=4,5, 6\n").unwrap();
        assert_eq!(cfg.text("manifold.name"), Some("torus"));
        assert_eq!(cfg.real_or("manifold.R", 0.0), 2.0);
        assert_eq!(cfg.ints("levels"), Some(vec![4, 5, 6]));
        assert_eq!(cfg.real_or("manifold.r", 0.5), 0.5);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = Config::parse("seed=1\nmanifold.radius=3\n").unwrap_err();
        assert_eq!(err.key, "manifold.radius");
    }

    #[test]
    fn malformed_values_are_rejected() {
        assert_eq!(Config::parse("seed=-1").unwrap_err().key, "seed");
        assert_eq!(Config::parse("T=abc").unwrap_err().key, "T");
        assert_eq!(Config::parse("p=1,x").unwrap_err().key, "p");
        assert_eq!(Config::parse("geodesic.reproject=maybe").unwrap_err().key, "geodesic.reproject");
        assert_eq!(Config::parse("just words").unwrap_err().key, "line 1");
    }

    #[test]
    fn later_assignments_override() {
        let mut cfg = Config::parse("seed=1").unwrap();
        cfg.assign("seed=7").unwrap();
        assert_eq!(cfg.uint_or("seed", 42), 7);
        assert!(cfg.positive_or("T", -1.0).is_err());
    }

    #[test]
    fn experiment_labels_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.label().parse::<Experiment>(), Ok(e));
        }
    }
}
