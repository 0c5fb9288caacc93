//! Batch front-end: parse an experiment config, run one of the pipelines
//! (classify, capacity, solve, compare, sweep) and write deterministic
//! JSON/CSV artifacts.
//!
//! Exit codes: 0 success, 2 configuration/validation error, 3 numerical
//! non-convergence or evaluation failure, 4 indeterminate verdict under
//! `--strict`.

pub mod config;
pub mod output;
pub mod pipeline;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;
use pipeline::{Determinacy, PipelineContext, PipelineError};
use rotcap_core::exec::{run_with_jobs, Mode};
use rotcap_core::Error as CoreError;

#[derive(Parser, Debug)]
#[command(
    name = "rotcap",
    about = "Capacity, parabolicity and comparison experiments on rotationally symmetric manifolds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Experiment configuration (JSON, strict schema).
    #[arg(long, global = true, default_value = "experiment.json")]
    pub config: PathBuf,

    /// Output directory for reports and curves.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Worker threads for batch work: 0 = all cores, 1 = sequential.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    /// Treat indeterminate verdicts as a failure (exit 4).
    #[arg(long, global = true)]
    pub strict: bool,

    /// Seed for sampled checks; overrides the config's seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy, Debug)]
pub enum Command {
    /// Run every parabolicity criterion and emit the verdict report.
    Classify,
    /// Closed-form, numerical and cutoff-bound capacities over annuli.
    Capacity,
    /// Construct a radial solution and export its curve.
    Solve,
    /// Run a comparison-principle experiment between two radial solutions.
    Compare,
    /// Matrix runs over profile/dimension/exponent grids.
    Sweep,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_INDETERMINATE: i32 = 4;

/// Runs the CLI and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let cfg = match ExperimentConfig::from_path(&cli.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };

    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let jobs = cli.jobs;
    let out_dir = cli.out.clone();
    let command = cli.command;

    let outcome = run_with_jobs(jobs, |mode| {
        let ctx = PipelineContext {
            out_dir,
            seed,
            jobs,
            mode: if jobs == 1 { Mode::Sequential } else { mode },
        };
        match command {
            Command::Classify => pipeline::run_classify(&cfg, &ctx),
            Command::Capacity => pipeline::run_capacity(&cfg, &ctx),
            Command::Solve => pipeline::run_solve(&cfg, &ctx),
            Command::Compare => pipeline::run_compare(&cfg, &ctx),
            Command::Sweep => pipeline::run_sweep(&cfg, &ctx),
        }
    });

    match outcome {
        Ok(Determinacy::Decided) => EXIT_OK,
        Ok(Determinacy::Indeterminate) => {
            if cli.strict {
                eprintln!("error: indeterminate verdict under --strict");
                EXIT_INDETERMINATE
            } else {
                EXIT_OK
            }
        }
        Err(PipelineError::Config(e)) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
        Err(PipelineError::Numerical(e)) => {
            let code = match &e {
                CoreError::Indeterminate(_) if cli.strict => EXIT_INDETERMINATE,
                _ => EXIT_NUMERICAL,
            };
            eprintln!("error: {e}");
            code
        }
        Err(PipelineError::Io(e)) => {
            eprintln!("error: {e}");
            EXIT_NUMERICAL
        }
    }
}
