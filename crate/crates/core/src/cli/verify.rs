//! Invariant suites behind `mmab verify`.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};

use crate::analysis::{exact_tv_small_epoch, kl_bernoulli, per_step_kl, AnalysisError};
use crate::env::{global_stats, make_thm4_instance, make_thm5_instance_with_coin, make_thm8_instance, ArmDistribution, Environment, Instance};
use crate::graph::{
    is_connected, make_complete_graph, make_disconnected_clique_graph, make_path_graph, make_two_expander_graph,
    metropolis_weights, sample_er_graph, sample_random_connected_graph, set_distance, Graph, TemporalGraphModel,
};
use crate::policy::{enumerate_min_regret, InfoModel, PolicySpec};
use crate::rng::SimRng;
use crate::sim::{agreement_decomposition, run};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Level {
    Fast,
    Full,
}

/// Functions under test, replaceable for fault injection.
#[derive(Clone, Copy)]
pub struct Hooks {
    pub per_step_kl: fn(f64) -> Result<f64, AnalysisError>,
}

impl Default for Hooks {
    fn default() -> Self {
        Hooks { per_step_kl }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteResult {
    pub name: &'static str,
    pub checks: usize,
    pub failures: Vec<String>,
    pub millis: u128,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

struct Tally {
    checks: usize,
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            checks: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

fn graph_suite(_: &Hooks) -> Tally {
    let mut t = Tally::new();
    let mut rng = SimRng::seed_from_u64(0x6772);
    let mut graphs: Vec<(String, Graph)> = Vec::new();
    for m in 2..=10 {
        graphs.push((format!("complete({m})"), make_complete_graph(m).unwrap()));
        graphs.push((format!("path({m})"), make_path_graph(m).unwrap()));
        graphs.push((format!("er({m})"), sample_er_graph(m, 0.4, &mut rng).unwrap()));
        let rc = sample_random_connected_graph(m, 0.2, &mut rng).unwrap();
        t.check(is_connected(&rc), || format!("random connected graph on {m} nodes is disconnected"));
        graphs.push((format!("random_connected({m})"), rc));
    }
    for (name, g) in &graphs {
        let w = metropolis_weights(g);
        t.check(w.max_row_deviation() <= 1e-12, || format!("{name}: row sums off"));
        t.check(w.max_column_deviation() <= 1e-12, || format!("{name}: column sums off"));
        let mut support = true;
        for i in 0..g.node_count() {
            for j in 0..g.node_count() {
                let v = w.get(i, j);
                support &= v >= 0.0 && (v == 0.0 || g.has_edge(i, j)) && v == w.get(j, i);
            }
        }
        t.check(support, || format!("{name}: weights leave the graph or are asymmetric"));
        let back = Graph::from_edge_list(&g.to_edge_list());
        t.check(back.as_ref() == Ok(g), || format!("{name}: edge list round trip"));
    }
    for m in (4..=32).step_by(4) {
        for eta in [0.5, 1.0, 2.0, 4.0] {
            let x = make_two_expander_graph(m, eta).unwrap();
            let dist = set_distance(&x.graph, &x.i0, &x.i1).unwrap();
            t.check(dist.is_some_and(|d| d >= x.required_distance()), || {
                format!("two_expander(M={m}, eta={eta}): distance {dist:?} < {}", x.required_distance())
            });
        }
    }
    for (m, q) in [(4, 1), (8, 3), (6, 5)] {
        let g = make_disconnected_clique_graph(m, q).unwrap();
        t.check(!is_connected(&g), || format!("disconnected_clique({m}, {q}) is connected"));
        t.check(g.edge_count() == q * (q - 1) / 2 + (m - q) * (m - q - 1) / 2, || {
            format!("disconnected_clique({m}, {q}): wrong edge count")
        });
    }
    t
}

fn env_suite(_: &Hooks) -> Tally {
    let mut t = Tally::new();
    for (m, q, delta) in [(4, 1, 0.4), (8, 1, 0.4), (8, 3, 0.2), (10, 2, 0.1)] {
        let st = global_stats(&make_thm4_instance(m, q, delta).unwrap());
        let mf = m as f64;
        let gap = (mf - 3.0) * delta / mf;
        t.check(st.optimal_arm == 0 && (st.gaps[1] - gap).abs() < 1e-12, || {
            format!("thm4({m}, {q}, {delta}): gap {} != {gap}", st.gaps[1])
        });
    }
    for x in [0u8, 1] {
        let (m, q) = (6, 2);
        let st = global_stats(&make_thm5_instance_with_coin(m, q, 2, x).unwrap());
        let arm1 = (q as f64 * 0.5 + (m - q) as f64 * f64::from(x)) / m as f64;
        t.check((st.global_means[0] - arm1).abs() < 1e-12 && (st.global_means[1] - 0.5).abs() < 1e-12, || {
            format!("thm5 x={x}: means {:?}", st.global_means)
        });
    }
    match make_thm8_instance(4, 262_144, 4.0) {
        Ok(a) => {
            t.check(a.epsilon() == 0.125, || format!("thm8 ε = {}", a.epsilon()));
            t.check(a.epoch_length() == 2, || format!("thm8 d = {}", a.epoch_length()));
            t.check(a.epoch_count() == 131_072, || format!("thm8 D = {}", a.epoch_count()));
            t.check(a.kl_budget() == 0.25, || format!("thm8 8ε²d = {}", a.kl_budget()));
        }
        Err(e) => t.check(false, || format!("thm8(4, 262144, 4): {e}")),
    }
    let err = make_thm8_instance(4, 512, 4.0).map(|_| ()).unwrap_err().to_string();
    t.check(err.contains("ε ≤ 1/4"), || format!("thm8(4, 512, 4) error: {err}"));
    t
}

fn kl_suite(h: &Hooks) -> Tally {
    let mut t = Tally::new();
    for i in 0..=1000 {
        let eps = 0.25 * f64::from(i) / 1000.0;
        let kl = (h.per_step_kl)(eps);
        t.check(kl.as_ref().is_ok_and(|&k| (0.0..=4.0 * eps * eps).contains(&k)), || {
            format!("per_step_kl({eps}) = {kl:?} outside [0, 4ε²]")
        });
    }
    t
}

fn pinsker_suite(h: &Hooks) -> Tally {
    let mut t = Tally::new();
    for i in 0..=100 {
        let eps = 0.25 * f64::from(i) / 100.0;
        let Ok(kl) = (h.per_step_kl)(eps) else {
            t.check(false, || format!("per_step_kl({eps}) failed"));
            continue;
        };
        let direct = kl_bernoulli(0.5, 0.5 + eps).unwrap();
        t.check((kl - direct).abs() <= 1e-12 * direct.max(1.0), || {
            format!("per_step_kl({eps}) = {kl} but KL(1/2 || 1/2 + ε) = {direct}")
        });
        for d in 1..=12u32 {
            if 8.0 * eps * eps * f64::from(d) > 1.0 {
                continue;
            }
            let tv = exact_tv_small_epoch(eps, d).unwrap();
            let pinsker = (f64::from(d) * kl / 2.0).sqrt();
            let bound = eps * (2.0 * f64::from(d)).sqrt();
            t.check(tv <= pinsker + 1e-12, || format!("ε={eps} d={d}: TV {tv} > √(d·KL/2) {pinsker}"));
            t.check(pinsker <= bound + 1e-12, || format!("ε={eps} d={d}: √(d·KL/2) {pinsker} > ε√(2d) {bound}"));
            t.check(bound <= 0.5 + 1e-12, || format!("ε={eps} d={d}: ε√(2d) = {bound} > 1/2"));
        }
    }
    t
}

fn sim_suite(_: &Hooks) -> Tally {
    let mut t = Tally::new();
    let row = [ArmDistribution::Bernoulli(0.7), ArmDistribution::Bernoulli(0.5)];
    let env: Environment = Instance::homogeneous(4, &row).unwrap().into();
    let graphs = TemporalGraphModel::Static(make_complete_graph(4).unwrap());
    let policies = [
        PolicySpec::GossipUcb { exploration: 2.0 },
        PolicySpec::Exp3Gossip { gamma0: 1.0 },
        PolicySpec::FullInfoLeader,
        PolicySpec::Fixed { arm: 1 },
        PolicySpec::UniformRandom,
    ];
    for p in &policies {
        let a = run(&env, &graphs, p, 2000, 11).unwrap();
        let b = run(&env, &graphs, p, 2000, 11).unwrap();
        t.check(a == b, || format!("{}: non-deterministic", p.label()));
        let inv = a.check_invariants();
        t.check(inv.is_ok(), || format!("{}: {inv:?}", p.label()));
        let d = agreement_decomposition(&a);
        t.check(d.exact_residual.abs() <= 1e-9, || format!("{}: residual {}", p.label(), d.exact_residual));
        t.check(d.sandwich_holds(4, 1e-9), || format!("{}: disagreement sum out of bounds", p.label()));
    }
    t
}

/// Instances with M = 3, K = 2 and one Bernoulli(1/2) entry.
pub fn enumeration_grid() -> Vec<Instance> {
    let mut rng = SimRng::seed_from_u64(0x7431);
    let levels = [0.1, 0.3, 0.4, 0.5, 0.6, 0.7, 0.9];
    let mut out = Vec::new();
    for coin in 0..6 {
        for _ in 0..2 {
            let rows: Vec<Vec<ArmDistribution>> = (0..3)
                .map(|c| {
                    (0..2)
                        .map(|a| {
                            if c * 2 + a == coin {
                                ArmDistribution::Bernoulli(0.5)
                            } else {
                                ArmDistribution::PointMass(levels[rng.random_range(0..levels.len())])
                            }
                        })
                        .collect()
                })
                .collect();
            out.push(Instance::new(format!("tiny{}", out.len()), rows).unwrap());
        }
    }
    out
}

fn enumeration_suite(_: &Hooks) -> Tally {
    let mut t = Tally::new();
    let graphs = [make_complete_graph(3).unwrap(), make_path_graph(3).unwrap(), Graph::empty(3).unwrap()];
    for inst in enumeration_grid() {
        let mut by_graph = Vec::new();
        for g in &graphs {
            let b = enumerate_min_regret(&inst, g, 2, InfoModel::BanditNeighbors).unwrap().min_regret;
            let f = enumerate_min_regret(&inst, g, 2, InfoModel::FullNeighbors).unwrap().min_regret;
            t.check(f <= b + 1e-12, || format!("{}: full {f} > bandit {b}", inst.label()));
            by_graph.push((b, f));
        }
        let (complete, empty) = (by_graph[0], by_graph[2]);
        t.check(empty.0 >= complete.0 - 1e-12 && empty.1 >= complete.1 - 1e-12, || {
            format!("{}: removing edges lowered a minimum", inst.label())
        });
    }
    t
}

type Suite = (&'static str, fn(&Hooks) -> Tally);

pub fn run_suites(level: Level, hooks: &Hooks) -> Vec<SuiteResult> {
    let mut suites: Vec<Suite> = vec![
        ("graph", graph_suite),
        ("env", env_suite),
        ("kl", kl_suite),
        ("pinsker", pinsker_suite),
        ("sim", sim_suite),
    ];
    if level == Level::Full {
        suites.push(("enumeration", enumeration_suite));
    }
    suites
        .into_iter()
        .map(|(name, f)| {
            let start = Instant::now();
            let tally = f(hooks);
            SuiteResult {
                name,
                checks: tally.checks,
                failures: tally.failures,
                millis: start.elapsed().as_millis(),
            }
        })
        .collect()
}

pub fn render(results: &[SuiteResult]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<12} {:>7} {:>8} {:>8}  status", "suite", "checks", "failed", "ms");
    for r in results {
        let status = if r.passed() { "pass" } else { "FAIL" };
        let _ = writeln!(
            out,
            "{:<12} {:>7} {:>8} {:>8}  {status}",
            r.name,
            r.checks,
            r.failures.len(),
            r.millis
        );
        for f in r.failures.iter().take(5) {
            let _ = writeln!(out, "    {f}");
        }
        if r.failures.len() > 5 {
            let _ = writeln!(out, "    ... {} more", r.failures.len() - 5);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_suites_pass() {
        let r = run_suites(Level::Fast, &Hooks::default());
        assert!(r.iter().all(SuiteResult::passed), "{}", render(&r));
        assert!(!r.iter().any(|s| s.name == "enumeration"));
    }

    #[test]
    fn full_level_adds_enumeration() {
        let r = run_suites(Level::Full, &Hooks::default());
        let e = r.iter().find(|s| s.name == "enumeration").unwrap();
        assert!(e.passed(), "{}", render(&r));
    }

    #[test]
    fn tampered_kl_fails_pinsker() {
        fn inflated(eps: f64) -> Result<f64, AnalysisError> {
            per_step_kl(eps).map(|k| k * 1.1)
        }
        let r = run_suites(Level::Fast, &Hooks { per_step_kl: inflated });
        let p = r.iter().find(|s| s.name == "pinsker").unwrap();
        assert!(!p.passed());
    }
}
