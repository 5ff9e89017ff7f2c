//! Experiment driver for the `qstaff` binary: configs, table and curve
//! generation, fixture diffs and the validation suite.

pub mod commands;
pub mod config;
pub mod error;
pub mod fixtures;
pub mod output;
pub mod validate;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{Outcome, RunOptions};
pub use config::ExperimentConfig;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "qstaff",
    version,
    about = "Finite-horizon staffing experiments for Levy-driven queues"
)]
pub struct Args {
    /// JSON experiment config.
    #[arg(long, global = true, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Bundled config: mm1, mpareto, rbm_sigma1 or rbm_sigma2 (default mm1).
    #[arg(long, global = true)]
    pub preset: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides every replication count in the config.
    #[arg(long, global = true)]
    pub replications: Option<u64>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Compare tables with the bundled reference values (default).
    #[arg(long, global = true, overrides_with = "no_fixture_check")]
    pub fixture_check: bool,
    #[arg(long, global = true, overrides_with = "fixture_check")]
    pub no_fixture_check: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Staffing comparison tables, one CSV per config, plus a fixture diff.
    Tables,
    /// C_T, its first-order approximation and C_inf over a speed grid.
    Curves,
    /// Transient mean workload from several initial states.
    Figure1,
    /// Property suite; exits with status 1 on any failure.
    Validate {
        /// Multiply u3 in the analytic layer by this factor (fault injection).
        #[arg(long)]
        perturb_u3: Option<f64>,
    },
    /// Optimality gap of the stationary rule on a geometric horizon grid.
    GapScaling,
    /// Print the effective config as JSON.
    ShowConfig,
}

/// Resolves the config and applies command-line overrides.
pub fn effective_config(args: &Args) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => ExperimentConfig::preset(name)?,
        (None, None) => ExperimentConfig::preset("mm1")?,
    };
    if let Some(seed) = args.seed {
        cfg.simulation.seed = seed;
    }
    if let Some(n) = args.replications {
        cfg.simulation.replications = n;
        cfg.curves.replications = n;
        cfg.figure1.replications = n;
        cfg.validate.replications = n;
        cfg.validate.convexity_replications = n;
    }
    if let Some(dir) = &args.out_dir {
        cfg.output_dir = dir.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(args: &Args) -> Result<Outcome, CliError> {
    let cfg = effective_config(args)?;
    if let Command::ShowConfig = args.command {
        return Ok(Outcome {
            messages: vec![cfg.to_json()],
            ..Outcome::default()
        });
    }
    let opts = RunOptions {
        out_dir: cfg.output_dir.clone(),
        fixture_check: !args.no_fixture_check,
    };
    let go = || match &args.command {
        Command::Tables => commands::cmd_tables(&cfg, &opts),
        Command::Curves => commands::cmd_curves(&cfg, &opts),
        Command::Figure1 => commands::cmd_figure1(&cfg, &opts),
        Command::Validate { perturb_u3 } => validate::cmd_validate(&cfg, &opts, *perturb_u3),
        Command::GapScaling => commands::cmd_gap_scaling(&cfg, &opts),
        Command::ShowConfig => unreachable!("handled above"),
    };
    match args.jobs {
        Some(0) => Err(CliError::Config("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
            .install(go),
        None => go(),
    }
}
