//! Exhaustive search over deterministic policies on tiny instances.
//!
//! The single Bernoulli(1/2) entry is modeled as a coin `b` drawn once per
//! run: that client's arm pays `b` at every step, and regret is scored
//! against the means of the realized `b`. A deterministic policy fixes the
//! step-1 action profile and, for step 2, a map from each client's
//! observation to an arm. Observations are the step-1 messages that the
//! information model lets through along the graph's edges.

use crate::env::{ArmDistribution, GlobalStats, Instance};
use crate::graph::Graph;

use super::{InfoModel, Message, PolicyError};

const MAX_CLIENTS: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct Enumeration {
    pub min_regret: f64,
    /// Number of deterministic policies evaluated.
    pub policies: u64,
    /// Step-1 action profile of a minimizing policy.
    pub first_profile: Vec<usize>,
}

struct Scenario {
    weight: f64,
    rewards: Vec<f64>,
    stats: GlobalStats,
}

fn scenarios(inst: &Instance) -> Result<Vec<Scenario>, PolicyError> {
    let (m, k) = (inst.client_count(), inst.arm_count());
    let stochastic = inst.stochastic_entries();
    let coin = match stochastic.as_slice() {
        [] => None,
        [(c, a)] => {
            if inst.dist(*c, *a) != ArmDistribution::Bernoulli(0.5) {
                return Err(PolicyError::NotEnumerable("the stochastic entry must be Bernoulli(1/2)".into()));
            }
            Some(c * k + a)
        }
        _ => {
            return Err(PolicyError::NotEnumerable(format!(
                "{} stochastic entries, at most one allowed",
                stochastic.len()
            )))
        }
    };
    let base = inst.mean_matrix();
    let build = |weight: f64, rewards: Vec<f64>| {
        let stats = GlobalStats::from_mean_matrix(m, k, &rewards);
        Scenario { weight, rewards, stats }
    };
    Ok(match coin {
        None => vec![build(1.0, base)],
        Some(idx) => [0.0, 1.0]
            .iter()
            .map(|&b| {
                let mut r = base.clone();
                r[idx] = b;
                build(0.5, r)
            })
            .collect(),
    })
}

fn step_regret(stats: &GlobalStats, actions: &[usize]) -> f64 {
    actions.iter().map(|&a| stats.gaps[a]).sum::<f64>() / actions.len() as f64
}

/// Canonical encoding of what `client` sees after step 1.
fn observation_key(
    model: InfoModel,
    g: &Graph,
    client: usize,
    profile: &[usize],
    rewards: &[f64],
    arms: usize,
) -> Vec<(usize, usize, usize, u64)> {
    let mut key = Vec::new();
    for j in g.closed_neighborhood(client) {
        let row = &rewards[j * arms..(j + 1) * arms];
        key.extend(Message::new(model, j, profile[j], row).atoms());
    }
    key.sort_unstable();
    key
}

/// Minimal expected pseudo-regret over deterministic policies whose step-2
/// actions are measurable with respect to `model`'s step-1 information.
pub fn enumerate_min_regret(
    inst: &Instance,
    g: &Graph,
    horizon: u64,
    model: InfoModel,
) -> Result<Enumeration, PolicyError> {
    let (m, k) = (inst.client_count(), inst.arm_count());
    if m > MAX_CLIENTS {
        return Err(PolicyError::NotEnumerable(format!("M = {m} exceeds {MAX_CLIENTS}")));
    }
    if k != 2 {
        return Err(PolicyError::NotEnumerable(format!("K = {k}, expected 2")));
    }
    if !(1..=2).contains(&horizon) {
        return Err(PolicyError::NotEnumerable(format!("T = {horizon}, expected 1 or 2")));
    }
    if g.node_count() != m {
        return Err(PolicyError::NotEnumerable(format!(
            "graph has {} nodes, instance has {m} clients",
            g.node_count()
        )));
    }
    let scen = scenarios(inst)?;

    let mut best = f64::INFINITY;
    let mut best_profile = Vec::new();
    let mut policies = 0u64;
    let profiles = k.pow(m as u32);
    for code in 0..profiles {
        let profile: Vec<usize> = (0..m).map(|c| (code / k.pow(c as u32)) % k).collect();
        let first: f64 = scen.iter().map(|s| s.weight * step_regret(&s.stats, &profile)).sum();

        if horizon == 1 {
            policies += 1;
            if first < best {
                best = first;
                best_profile = profile;
            }
            continue;
        }

        // key_index[c][s] = index of scenario s's observation among client c's distinct keys
        let mut key_index = vec![vec![0usize; scen.len()]; m];
        let mut key_counts = vec![0usize; m];
        for c in 0..m {
            let mut seen: Vec<Vec<(usize, usize, usize, u64)>> = Vec::new();
            for (s, sc) in scen.iter().enumerate() {
                let key = observation_key(model, g, c, &profile, &sc.rewards, k);
                key_index[c][s] = match seen.iter().position(|x| *x == key) {
                    Some(p) => p,
                    None => {
                        seen.push(key);
                        seen.len() - 1
                    }
                };
            }
            key_counts[c] = seen.len();
        }

        // a rule for client c assigns an arm to each of its distinct keys
        let rules: Vec<usize> = key_counts.iter().map(|&n| k.pow(n as u32)).collect();
        let combos: usize = rules.iter().product();
        let mut second = vec![0usize; m];
        for combo in 0..combos {
            let mut rest = combo;
            let mut rule_of = vec![0usize; m];
            for c in 0..m {
                rule_of[c] = rest % rules[c];
                rest /= rules[c];
            }
            let mut total = first;
            for (s, sc) in scen.iter().enumerate() {
                for c in 0..m {
                    second[c] = (rule_of[c] / k.pow(key_index[c][s] as u32)) % k;
                }
                total += sc.weight * step_regret(&sc.stats, &second);
            }
            policies += 1;
            if total < best {
                best = total;
                best_profile = profile.clone();
            }
        }
    }
    Ok(Enumeration {
        min_regret: best,
        policies,
        first_profile: best_profile,
    })
}
