use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gem_cli::{run, Experiment, Invocation};

/// Simulate SDEs on embedded manifolds and check convergence rates.
#[derive(Parser)]
#[command(name = "gem", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Projector, second fundamental form, Itô correction and Taylor checks.
    GeometryCheck(Common),
    /// Strong error of GEM against a fine reference path.
    Convergence(Common),
    /// Discrepancy between GEM and extrinsic EM on shared noise.
    Coupling(Common),
    /// One-step mean bias and centered moment of GEM vs EM.
    OneStepBias(Common),
    /// Terminal cloud of Riemannian Langevin dynamics.
    RldSample(Common),
    /// Wasserstein distance to the target law over time.
    RldMixing(Common),
    /// Rate fit on a synthetic curve.
    Selftest(Common),
}

#[derive(Args)]
struct Common {
    /// Config file of key=value lines.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override a config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: available cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Exit with status 3 when any acceptance check fails.
    #[arg(long)]
    check: bool,
    /// Output directory (default: results).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let (experiment, c) = match Cli::parse().command {
        Command::GeometryCheck(c) => (Experiment::GeometryCheck, c),
        Command::Convergence(c) => (Experiment::Convergence, c),
        Command::Coupling(c) => (Experiment::Coupling, c),
        Command::OneStepBias(c) => (Experiment::OneStepBias, c),
        Command::RldSample(c) => (Experiment::RldSample, c),
        Command::RldMixing(c) => (Experiment::RldMixing, c),
        Command::Selftest(c) => (Experiment::Selftest, c),
    };
    let inv = Invocation {
        experiment: Some(experiment),
        config: c.config,
        sets: c.sets,
        seed: c.seed,
        workers: c.workers,
        check: c.check,
        out: c.out,
    };
    ExitCode::from(run(&inv) as u8)
}
