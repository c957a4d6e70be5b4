//! `trudlab` — run eigen solves, evolutions, and verification batteries from
//! a config file and export deterministic CSV artifacts.
//!
//! ```text
//! trudlab <command> --config <path> [--out <dir>] [--seed <int>]
//! ```
//!
//! Exit status: 0 when every requested check passes, 1 when a check fails,
//! 2 on configuration or solver errors.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

#[derive(Parser)]
#[command(
    name = "trudlab",
    version,
    about = "Numerical laboratory for a doubly nonlinear diffusion and the p-Laplacian eigenproblem"
)]
struct Cli {
    /// What to run.
    #[arg(value_enum)]
    command: config::CommandKind,

    /// Experiment config file (see the schema in the README).
    #[arg(long)]
    config: PathBuf,

    /// Output directory; overrides the config's `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Seed for randomized profiles; overrides `[experiment] seed`. All
    /// built-in profiles are deterministic, so this only lands in the echo.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match config::ExperimentConfig::load(&cli.config) {
        Ok(cfg) => cfg,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(2);
        }
    };
    if let Some(out) = cli.out {
        cfg.out_dir = out;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cfg.out_dir.clone();
    match commands::run(cli.command, &cfg, &out) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            if let Some(trudlab_core::Error::SolverStall { best, .. }) =
                err.downcast_ref::<trudlab_core::Error>()
            {
                eprintln!(
                    "best iterate: lambda = {:.6e}, residual = {:.3e} after {} iterations",
                    best.lambda, best.residual, best.iterations
                );
            }
            ExitCode::from(2)
        }
    }
}
