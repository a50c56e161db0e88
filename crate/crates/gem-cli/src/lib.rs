//! Batch experiment runner for `gem-core`.
//!
//! An experiment is a [`Config`] plus a kind. [`run`] resolves overrides,
//! executes the experiment on a [`Threaded`] executor, writes result CSV
//! files and a JSON [`RunManifest`] into the output directory, and maps the
//! outcome to an exit code.

pub mod config;
pub mod exec;
pub mod experiments;
pub mod output;
pub mod registry;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

pub use config::{Config, ConfigError, Experiment};
pub use exec::Threaded;
pub use output::{Check, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CHECK: i32 = 3;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: gem_core::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Core { .. } | RunError::Io { .. } => EXIT_RUNTIME,
        }
    }
}

/// Everything a command line can specify.
#[derive(Debug, Clone, Default)]
pub struct Invocation {
    pub experiment: Option<Experiment>,
    pub config: Option<PathBuf>,
    pub sets: Vec<String>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub check: bool,
    pub out: Option<PathBuf>,
}

/// Config file, then `--set` assignments, then the dedicated flags.
pub fn resolve(inv: &Invocation) -> Result<(Experiment, Config), RunError> {
    let mut cfg = match &inv.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| RunError::Io { path: path.clone(), source })?;
            Config::parse(&text)?
        }
        None => Config::default(),
    };
    for s in &inv.sets {
        cfg.assign(s)?;
    }
    if let Some(seed) = inv.seed {
        cfg.set("seed", &seed.to_string())?;
    }
    if let Some(w) = inv.workers {
        cfg.set("workers", &w.to_string())?;
    }
    if let Some(out) = &inv.out {
        cfg.set("out", &out.to_string_lossy())?;
    }
    let from_file = cfg.text("experiment").map(|s| {
        s.parse::<Experiment>().map_err(|_| ConfigError::new("experiment", format!("unknown experiment `{s}`")))
    });
    let exp = match (inv.experiment, from_file) {
        (Some(e), Some(f)) if f.clone()? != e => {
            return Err(ConfigError::new("experiment", format!("config names `{}` but `{e}` was requested", f?)).into())
        }
        (Some(e), _) => e,
        (None, Some(f)) => f?,
        (None, None) => return Err(ConfigError::new("experiment", "no experiment given").into()),
    };
    Ok((exp, cfg))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), RunError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| RunError::Io { path, source })
}

/// Runs the experiment and writes its outputs; returns the manifest.
pub fn execute(inv: &Invocation) -> Result<RunManifest, RunError> {
    let (exp, cfg) = resolve(inv)?;
    let workers = match cfg.text("workers") {
        Some(_) => Threaded::new(cfg.usize_or("workers", 1)?),
        None => Threaded::available(),
    };
    let dir = PathBuf::from(cfg.text_or("out", "results"));
    let start = Instant::now();
    let report = experiments::execute(exp, &cfg, &workers)?;
    let wall = start.elapsed().as_secs_f64();
    fs::create_dir_all(&dir).map_err(|source| RunError::Io { path: dir.clone(), source })?;
    for (name, contents) in &report.files {
        write(&dir, name, contents)?;
    }
    let mut echo = cfg.values().clone();
    echo.insert("experiment".into(), exp.label().into());
    echo.entry("seed".into()).or_insert_with(|| "42".into());
    echo.insert("workers".into(), workers.workers().to_string());
    echo.insert("out".into(), dir.to_string_lossy().into_owned());
    let manifest_name = format!("{exp}.manifest.json");
    let manifest = RunManifest {
        experiment: exp.label().into(),
        version: concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")).into(),
        config: echo,
        wall_time_seconds: wall,
        checks: report.checks,
        outputs: report.files.iter().map(|(n, _)| n.clone()).chain([manifest_name.clone()]).collect(),
    };
    write(&dir, &manifest_name, &manifest.to_json())?;
    for note in &report.notes {
        println!("{note}");
    }
    Ok(manifest)
}

/// Runs and reports; returns the process exit code.
pub fn run(inv: &Invocation) -> i32 {
    match execute(inv) {
        Ok(manifest) => {
            for c in &manifest.checks {
                let bounds = match (c.lo, c.hi) {
                    (Some(lo), Some(hi)) => format!("in [{lo:e}, {hi:e}]"),
                    (Some(lo), None) => format!(">= {lo:e}"),
                    (None, Some(hi)) => format!("<= {hi:e}"),
                    (None, None) => String::new(),
                };
                println!("{} {} = {:.6e} {bounds}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value);
            }
            println!("wall time {:.2}s", manifest.wall_time_seconds);
            if inv.check && !manifest.all_pass() {
                EXIT_CHECK
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
