//! `run`, `sweep` and `instance-info`.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    aggregate_runs, epoch_bounds, fit_scaling_exponent, per_step_kl, read_aggregate_csv, write_aggregate_csv,
    AggregatePoint, FitReport,
};
use crate::env::{Environment, GlobalStats};
use crate::rng::derive_run_seed;
use crate::sim::{run, RunMetadata, Trajectory};

use super::config::{ExperimentConfig, SpecCall};
use super::factory::{InstanceKind, Resolved};
use super::CliError;

/// Writes `bytes` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    let io = |e: std::io::Error| CliError::Other(anyhow::anyhow!("writing {}: {e}", path.display()));
    {
        let file = fs::File::create(&tmp).map_err(io)?;
        let mut w = BufWriter::new(file);
        write(&mut w).map_err(io)?;
        w.flush().map_err(io)?;
    }
    fs::rename(&tmp, path).map_err(io)
}

pub fn run_file_name(horizon: u64, seed: u64) -> String {
    format!("run_T{horizon}_s{seed}.csv")
}

#[derive(Clone, Debug, Serialize)]
struct ConfigEcho {
    instance: String,
    graph: String,
    policy: String,
    horizons: Vec<u64>,
    seeds: Vec<u64>,
    master_seed: u64,
}

impl From<&ExperimentConfig> for ConfigEcho {
    fn from(c: &ExperimentConfig) -> Self {
        ConfigEcho {
            instance: c.instance.to_string(),
            graph: c.graph.to_string(),
            policy: c.policy.to_string(),
            horizons: c.horizons.clone(),
            seeds: c.seeds.clone(),
            master_seed: c.master_seed,
        }
    }
}

#[derive(Serialize)]
struct Metadata<'a> {
    config: ConfigEcho,
    runs: &'a [RunMetadata],
}

/// Simulates one `(T, seed)` cell.
pub fn run_cell(
    cfg: &ExperimentConfig,
    resolved: &Resolved,
    horizon_index: usize,
    seed: u64,
) -> Result<(Trajectory, RunMetadata), CliError> {
    let horizon = cfg.horizons[horizon_index];
    let run_seed = derive_run_seed(cfg.master_seed, horizon_index as u64, seed);
    let env = resolved.instance.environment(horizon, run_seed)?;
    let graphs = resolved.graph.model(env.client_count(), &resolved.instance)?;
    let traj = run(&env, &graphs, &resolved.policy, horizon, run_seed).map_err(|e| match e {
        crate::sim::SimError::Policy(p) => CliError::config(p),
        other => CliError::config(other),
    })?;
    traj.check_invariants().map_err(CliError::Invariant)?;
    let meta = RunMetadata {
        instance: env.label(),
        graph: graphs.describe(),
        policy: resolved.policy.label(),
        info_model: resolved.policy.info_model().name(),
        horizon,
        seed,
        run_seed,
        clients: env.client_count(),
        arms: env.arm_count(),
        final_regret: traj.final_regret(),
        t_agree: traj.t_agree,
        t_disagree: traj.t_disagree,
    };
    Ok((traj, meta))
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        b = b.num_threads(j.max(1));
    }
    b.build().map_err(|e| CliError::Other(e.into()))
}

/// Runs the whole grid, writing per-cell CSVs when `out` is set. Results
/// come back ordered by `(T, seed)` whatever the scheduling.
pub fn run_grid(cfg: &ExperimentConfig, out: Option<&Path>, jobs: Option<usize>) -> Result<Vec<RunMetadata>, CliError> {
    let resolved = Resolved::new(&cfg.instance, &cfg.graph, &cfg.policy)?;
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| CliError::Other(anyhow::anyhow!("creating {}: {e}", dir.display())))?;
    }
    let cells: Vec<(usize, u64)> = (0..cfg.horizons.len())
        .flat_map(|h| cfg.seeds.iter().map(move |&s| (h, s)))
        .collect();
    let results: Vec<Result<RunMetadata, CliError>> = pool(jobs)?.install(|| {
        cells
            .par_iter()
            .map(|&(h, seed)| {
                let (traj, meta) = run_cell(cfg, &resolved, h, seed)?;
                if let (Some(dir), true) = (out, cfg.write_runs) {
                    let path = dir.join(run_file_name(meta.horizon, seed));
                    write_atomic(&path, |w| traj.write_csv(w))?;
                }
                log::info!("T = {} seed = {} regret = {}", meta.horizon, seed, meta.final_regret);
                Ok(meta)
            })
            .collect()
    });
    let mut metas = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    metas.sort_by_key(|m| (m.horizon, m.seed));
    Ok(metas)
}

fn write_metadata(dir: &Path, cfg: &ExperimentConfig, metas: &[RunMetadata]) -> Result<(), CliError> {
    let doc = Metadata {
        config: cfg.into(),
        runs: metas,
    };
    write_atomic(&dir.join("metadata.json"), |w| {
        serde_json::to_writer_pretty(&mut *w, &doc)?;
        writeln!(w)
    })
}

pub fn cmd_run(cfg: &ExperimentConfig, out: &Path, jobs: Option<usize>) -> Result<Vec<RunMetadata>, CliError> {
    let metas = run_grid(cfg, Some(out), jobs)?;
    write_metadata(out, cfg, &metas)?;
    Ok(metas)
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub aggregate: Vec<AggregatePoint>,
    pub fit: Option<FitReport>,
}

/// Aggregates final regrets and writes `aggregate.csv` and, when the fit
/// succeeds, `fit.json`.
fn report(dir: &Path, records: &[(u64, u64, f64)]) -> Result<SweepOutcome, CliError> {
    let aggregate = aggregate_runs(records).map_err(CliError::config)?;
    write_atomic(&dir.join("aggregate.csv"), |w| write_aggregate_csv(w, &aggregate))?;
    let points: Vec<_> = aggregate.iter().map(AggregatePoint::scaling_point).collect();
    let fit = match fit_scaling_exponent(&points) {
        Ok(f) => {
            let rep = f.report();
            write_atomic(&dir.join("fit.json"), |w| {
                serde_json::to_writer_pretty(&mut *w, &rep)?;
                writeln!(w)
            })?;
            Some(rep)
        }
        Err(e) => {
            log::warn!("no scaling fit: {e}");
            eprintln!("warning: no scaling fit written: {e}");
            let stale = dir.join("fit.json");
            if stale.exists() {
                fs::remove_file(&stale).map_err(|e| CliError::Other(e.into()))?;
            }
            None
        }
    };
    Ok(SweepOutcome { aggregate, fit })
}

pub fn cmd_sweep(cfg: &ExperimentConfig, out: &Path, jobs: Option<usize>) -> Result<SweepOutcome, CliError> {
    if cfg.horizons.len() < 3 {
        return Err(CliError::config("sweep needs at least 3 horizons"));
    }
    if cfg.seeds.len() < 2 {
        return Err(CliError::config("sweep needs at least 2 seeds"));
    }
    let metas = run_grid(cfg, Some(out), jobs)?;
    write_metadata(out, cfg, &metas)?;
    let records: Vec<(u64, u64, f64)> = metas.iter().map(|m| (m.horizon, m.seed, m.final_regret)).collect();
    report(out, &records)
}

/// Rebuilds the aggregate and fit from stored `run_T*_s*.csv` files.
pub fn cmd_replay(dir: &Path, out: &Path) -> Result<SweepOutcome, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::config(format!("cannot read {}: {e}", dir.display())))?;
    let mut records = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::Other(e.into()))?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
        let Some((t, s)) = name
            .strip_prefix("run_T")
            .and_then(|r| r.strip_suffix(".csv"))
            .and_then(|r| r.split_once("_s"))
        else {
            continue;
        };
        let (Ok(t), Ok(s)) = (t.parse::<u64>(), s.parse::<u64>()) else { continue };
        let text = fs::read_to_string(&path).map_err(|e| CliError::Other(e.into()))?;
        let last = text
            .lines()
            .last()
            .ok_or_else(|| CliError::config(format!("{name} is empty")))?;
        let regret: f64 = last
            .split(',')
            .nth(1)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| CliError::config(format!("{name}: cannot read final regret")))?;
        records.push((t, s, regret));
    }
    if records.is_empty() {
        return Err(CliError::config(format!("no run CSVs in {}", dir.display())));
    }
    fs::create_dir_all(out).map_err(|e| CliError::Other(e.into()))?;
    report(out, &records)
}

/// Reads an `aggregate.csv` back and refits it.
pub fn refit_aggregate(path: &Path) -> Result<FitReport, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let points = read_aggregate_csv(std::io::BufReader::new(file)).map_err(CliError::config)?;
    fit_scaling_exponent(&points).map(|f| f.report()).map_err(CliError::config)
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn list(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

fn stats_block(out: &mut String, stats: &GlobalStats) {
    let _ = writeln!(out, "global means = [{}]", list(&stats.global_means));
    let _ = writeln!(out, "optimal arm = {}", stats.optimal_arm + 1);
    let _ = writeln!(out, "gaps = [{}]", list(&stats.gaps));
}

/// Report for `instance-info`. Returns the text and whether every bound
/// check passed.
pub fn instance_info(spec: &SpecCall, horizon: Option<u64>) -> Result<(String, bool), CliError> {
    let kind = InstanceKind::resolve(spec)?;
    let t = match (&kind, horizon) {
        (InstanceKind::Thm8 { horizon: Some(t), .. }, _) => *t,
        (InstanceKind::Thm8 { horizon: None, .. }, None) => {
            return Err(CliError::config("thm8 needs T, either in the spec or via --horizon"))
        }
        (_, h) => h.unwrap_or(1),
    };
    let env = kind.environment(t, 0)?;
    let mut out = String::new();
    let _ = writeln!(out, "instance = {}", env.label());
    let _ = writeln!(out, "M = {}", env.client_count());
    let _ = writeln!(out, "K = {}", env.arm_count());
    let mut ok = true;
    match &env {
        Environment::Stochastic(inst) => {
            stats_block(&mut out, &crate::env::global_stats(inst));
            if let Some(coin) = inst.latent() {
                let _ = writeln!(out, "latent coin x = {}", coin.x);
            }
        }
        Environment::Adversarial(a) => {
            let _ = writeln!(out, "T = {}", a.horizon());
            let _ = writeln!(out, "η = {}", a.eta());
            let _ = writeln!(out, "ε = {}", a.epsilon());
            let _ = writeln!(out, "d = {}", a.epoch_length());
            let _ = writeln!(out, "D = {}", a.epoch_count());
            let _ = writeln!(out, "8ε²d = {}", a.kl_budget());
            let _ = writeln!(out, "I0 = clients 1..{}", a.i0().len());
            let _ = writeln!(out, "I1 = clients {}..{}", a.i1()[0] + 1, a.client_count());
            stats_block(&mut out, &a.global_stats());
            let mf = a.client_count() as f64;
            let eps_plain = mf * mf / 2.0 / (a.horizon() as f64).cbrt();
            let per = per_step_kl(a.epsilon()).map_err(CliError::config)?;
            let four = 4.0 * a.epsilon() * a.epsilon();
            let checks = [
                ("ε ≤ 1/4".to_string(), a.epsilon() <= 0.25),
                ("8ε²d ≤ 1".to_string(), a.kl_budget() <= 1.0),
                (format!("(M²/2)T^(-1/3) = {eps_plain} ≤ 1/4"), eps_plain <= 0.25),
                (format!("per-step KL = {per} ≤ 4ε² = {four}"), per <= four),
            ];
            for (what, good) in checks {
                ok &= good;
                let _ = writeln!(out, "check {what}: {}", pass(good));
            }
            let d = u32::try_from(a.epoch_length()).unwrap_or(u32::MAX);
            match epoch_bounds(a.epsilon(), d) {
                Ok(b) => {
                    let good = b.tv_bound <= 0.5;
                    ok &= good;
                    let _ = writeln!(out, "check TV bound ε√(2d) = {} ≤ 1/2: {}", b.tv_bound, pass(good));
                }
                Err(e) => {
                    ok = false;
                    let _ = writeln!(out, "check epoch bounds: FAIL ({e})");
                }
            }
        }
    }
    Ok((out, ok))
}

/// Default output directory when neither `--out` nor `out` is given.
pub fn default_out() -> PathBuf {
    PathBuf::from("mmab-out")
}
