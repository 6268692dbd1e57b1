//! Command-line front end: `run`, `sweep`, `verify` and `instance-info`.
//!
//! Exit codes: 0 on success, 2 for configuration errors (including
//! instance constraint violations), 3 for invariant failures, 1 otherwise.

pub mod commands;
pub mod config;
pub mod factory;
pub mod verify;

use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::{ExperimentConfig, SpecCall};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("invariant failure: {0}")]
    Invariant(String),
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

impl CliError {
    pub fn config(msg: impl Display) -> Self {
        CliError::Config(msg.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Other(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mmab", version, about = "Multi-client bandit simulations on communication graphs")]
pub struct Cli {
    /// Experiment config (flat key = value text, or JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for the (T, seed) grid.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate every (T, seed) cell and write per-run CSVs plus metadata.json.
    Run,
    /// Run the grid, aggregate final regrets and fit the scaling exponent.
    Sweep {
        /// Rebuild the aggregate and fit from run CSVs in this directory instead of simulating.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// Run the built-in invariant suites.
    Verify {
        #[arg(long, value_enum, default_value = "fast")]
        level: verify::Level,
    },
    /// Print global statistics and, for the epoch adversary, its constants and bound checks.
    InstanceInfo {
        /// Instance spec such as `thm8(M=4, T=262144, eta=4)`; defaults to the config's.
        #[arg(long)]
        instance: Option<String>,
        /// Horizon for horizon-dependent instances.
        #[arg(long)]
        horizon: Option<u64>,
    },
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::config("--config is required for this command"))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    Ok(cfg)
}

fn out_dir(cfg: &ExperimentConfig) -> Result<PathBuf, CliError> {
    let out = cfg.out.clone().unwrap_or_else(commands::default_out);
    std::fs::create_dir_all(&out)
        .map_err(|e| CliError::config(format!("cannot create {}: {e}", out.display())))?;
    Ok(out)
}

/// Executes a parsed command line and returns the text to print.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Run => {
            let cfg = load_config(cli)?;
            let out = out_dir(&cfg)?;
            let metas = commands::cmd_run(&cfg, &out, cli.jobs)?;
            Ok(format!("wrote {} runs to {}\n", metas.len(), out.display()))
        }
        Command::Sweep { replay } => {
            let (outcome, out) = match replay {
                Some(dir) => {
                    let out = cli.out.clone().unwrap_or_else(|| dir.clone());
                    (commands::cmd_replay(dir, &out)?, out)
                }
                None => {
                    let cfg = load_config(cli)?;
                    let out = out_dir(&cfg)?;
                    (commands::cmd_sweep(&cfg, &out, cli.jobs)?, out)
                }
            };
            let mut text = String::from("T,mean_regret,stderr\n");
            for p in &outcome.aggregate {
                text.push_str(&format!("{},{},{}\n", p.horizon, p.mean, p.stderr));
            }
            if let Some(fit) = &outcome.fit {
                text.push_str(&format!(
                    "alpha = {:.4}, prefactor = {:.4}, r2 = {:.4}\n",
                    fit.alpha, fit.prefactor, fit.r2
                ));
            }
            text.push_str(&format!("output: {}\n", out.display()));
            Ok(text)
        }
        Command::Verify { level } => {
            let results = verify::run_suites(*level, &verify::Hooks::default());
            let table = verify::render(&results);
            if results.iter().all(verify::SuiteResult::passed) {
                Ok(table)
            } else {
                print!("{table}");
                Err(CliError::Invariant("verification suites failed".into()))
            }
        }
        Command::InstanceInfo { instance, horizon } => {
            let (spec, horizon) = match instance {
                Some(text) => (SpecCall::parse(text)?, *horizon),
                None => {
                    let cfg = load_config(cli)?;
                    (cfg.instance.clone(), horizon.or(cfg.horizons.last().copied()))
                }
            };
            let (text, ok) = commands::instance_info(&spec, horizon)?;
            if ok {
                Ok(text)
            } else {
                print!("{text}");
                Err(CliError::Invariant("instance bound checks failed".into()))
            }
        }
    }
}

pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
