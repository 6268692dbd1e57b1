//! The interaction protocol and regret accounting.
//!
//! Each step: the graph model emits G_t, every client acts on what it has
//! seen through t-1, rewards are drawn, messages travel along E_t, and gossip
//! payloads are mixed with the Metropolis weights of G_t.
//!
//! Pseudo-regret at a step is `(1/M) sum_m Delta_{a_m}`, the global gap of
//! each pulled arm averaged over clients. For the epoch adversary the gaps
//! are those of the epoch state in force.

use std::borrow::Cow;
use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::env::{Environment, GlobalStats};
use crate::graph::{metropolis_weights, TemporalGraphModel, WeightMatrix};
use crate::policy::{ClientPolicy, Message, PolicyError, PolicySpec};
use crate::rng::{stream, Stream};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("adversarial instance was built for T = {expected}, run requested T = {requested}")]
    HorizonMismatch { expected: u64, requested: u64 },
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("policy returned arm {arm} with only {arms} arms")]
    BadAction { arm: usize, arms: usize },
    #[error("trajectory was not produced by an adversarial epoch instance")]
    NotAdversarial,
    #[error("the identity check needs K = 2, got K = {0}")]
    IdentityNeedsTwoArms(usize),
    #[error("reward tape holds {got} values, expected {expected}")]
    TapeLength { expected: usize, got: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpochInfo {
    pub epoch_length: u64,
    pub epoch_count: u64,
    pub states: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub horizon: u64,
    pub clients: usize,
    pub arms: usize,
    /// `actions[(t - 1) * M + m]`, 0-based arms.
    pub actions: Vec<u16>,
    /// `pull_counts[m * K + i]`.
    pub pull_counts: Vec<u64>,
    pub regret_curve: Vec<f64>,
    pub realized_curve: Vec<f64>,
    /// Distinct per-step statistics; `stats_index[t - 1]` selects one.
    pub stats: Vec<GlobalStats>,
    pub stats_index: Vec<u32>,
    pub t_agree: u64,
    pub t_disagree: u64,
    pub epochs: Option<EpochInfo>,
    pub run_seed: u64,
}

impl Trajectory {
    pub fn actions_at(&self, t: u64) -> &[u16] {
        let s = (t - 1) as usize * self.clients;
        &self.actions[s..s + self.clients]
    }

    pub fn stats_at(&self, t: u64) -> &GlobalStats {
        &self.stats[self.stats_index[(t - 1) as usize] as usize]
    }

    pub fn final_regret(&self) -> f64 {
        self.regret_curve.last().copied().unwrap_or(0.0)
    }

    pub fn step_regret(&self, t: u64) -> f64 {
        let i = (t - 1) as usize;
        self.regret_curve[i] - if i == 0 { 0.0 } else { self.regret_curve[i - 1] }
    }

    pub fn disagrees_at(&self, t: u64) -> bool {
        let a = self.actions_at(t);
        a.iter().any(|&x| x != a[0])
    }

    /// Writes `t,cum_regret,realized_regret,T_d_so_far`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,cum_regret,realized_regret,T_d_so_far")?;
        let mut td = 0u64;
        for t in 1..=self.horizon {
            if self.disagrees_at(t) {
                td += 1;
            }
            let i = (t - 1) as usize;
            writeln!(w, "{t},{},{},{td}", self.regret_curve[i], self.realized_curve[i])?;
        }
        Ok(())
    }

    /// Asserted after every run: counts conserve T and the curve never drops.
    pub fn check_invariants(&self) -> Result<(), String> {
        for m in 0..self.clients {
            let n: u64 = self.pull_counts[m * self.arms..(m + 1) * self.arms].iter().sum();
            if n != self.horizon {
                return Err(format!("client {m} has {n} pulls over T = {}", self.horizon));
            }
        }
        if self.t_agree + self.t_disagree != self.horizon {
            return Err("T_a + T_d != T".into());
        }
        let mut prev = 0.0;
        for (i, &r) in self.regret_curve.iter().enumerate() {
            if r < prev || r.is_nan() {
                return Err(format!("regret curve decreases at t = {}", i + 1));
            }
            prev = r;
        }
        Ok(())
    }
}

/// Run metadata written next to each trajectory CSV.
#[derive(Clone, Debug, Serialize)]
pub struct RunMetadata {
    pub instance: String,
    pub graph: String,
    pub policy: String,
    pub info_model: &'static str,
    pub horizon: u64,
    pub seed: u64,
    pub run_seed: u64,
    pub clients: usize,
    pub arms: usize,
    pub final_regret: f64,
    pub t_agree: u64,
    pub t_disagree: u64,
}

/// `(1/M) sum_m Delta_{a_m}` for one step's actions.
pub fn pseudo_regret_step(actions: &[usize], stats: &GlobalStats) -> f64 {
    actions.iter().map(|&a| stats.gaps[a]).sum::<f64>() / actions.len() as f64
}

/// `mu_{i*} - (1/M) sum_m mu^m_{a_m}`, scoring each client by its own means.
/// Unlike [`pseudo_regret_step`] this can be negative when a client's local
/// best arm differs from the global one.
pub fn pseudo_regret_step_local(actions: &[usize], means: &[f64], stats: &GlobalStats) -> f64 {
    let k = stats.global_means.len();
    let own: f64 = actions.iter().enumerate().map(|(m, &a)| means[m * k + a]).sum();
    stats.best_mean() - own / actions.len() as f64
}

/// Reward values for every step, `tape[((t - 1) * M + m) * K + i]`.
pub type RewardTape = Vec<f64>;

pub fn run(
    env: &Environment,
    graphs: &TemporalGraphModel,
    policy: &PolicySpec,
    horizon: u64,
    run_seed: u64,
) -> Result<Trajectory, SimError> {
    simulate(env, graphs, policy, horizon, run_seed, Source::Draw).map(|(t, _)| t)
}

/// Like [`run`], also returning every drawn reward.
pub fn run_recorded(
    env: &Environment,
    graphs: &TemporalGraphModel,
    policy: &PolicySpec,
    horizon: u64,
    run_seed: u64,
) -> Result<(Trajectory, RewardTape), SimError> {
    simulate(env, graphs, policy, horizon, run_seed, Source::Record(Vec::new()))
        .map(|(t, tape)| (t, tape.unwrap_or_default()))
}

/// Replays fixed rewards instead of drawing them. Graph and policy streams
/// are derived from `run_seed` as in [`run`].
pub fn run_with_tape(
    env: &Environment,
    graphs: &TemporalGraphModel,
    policy: &PolicySpec,
    horizon: u64,
    run_seed: u64,
    tape: &[f64],
) -> Result<Trajectory, SimError> {
    let expected = horizon as usize * env.client_count() * env.arm_count();
    if tape.len() != expected {
        return Err(SimError::TapeLength { expected, got: tape.len() });
    }
    simulate(env, graphs, policy, horizon, run_seed, Source::Replay(tape)).map(|(t, _)| t)
}

enum Source<'a> {
    Draw,
    Record(RewardTape),
    Replay(&'a [f64]),
}

fn simulate(
    env: &Environment,
    graphs: &TemporalGraphModel,
    policy: &PolicySpec,
    horizon: u64,
    run_seed: u64,
    mut source: Source<'_>,
) -> Result<(Trajectory, Option<RewardTape>), SimError> {
    let (m, k) = (env.client_count(), env.arm_count());
    if graphs.node_count() != m {
        return Err(SimError::Dimension(format!(
            "graph model has {} nodes, instance has {m} clients",
            graphs.node_count()
        )));
    }
    if k > u16::MAX as usize {
        return Err(SimError::Dimension(format!("K = {k} exceeds {}", u16::MAX)));
    }
    let mut env_rng = stream(run_seed, Stream::Environment);
    let mut graph_rng = stream(run_seed, Stream::Graph);
    let mut policy_rng = stream(run_seed, Stream::Policy);

    let env: Cow<Environment> = match env {
        Environment::Adversarial(a) => {
            if a.horizon() != horizon {
                return Err(SimError::HorizonMismatch {
                    expected: a.horizon(),
                    requested: horizon,
                });
            }
            let mut a = a.clone();
            a.materialize(&mut env_rng);
            Cow::Owned(Environment::Adversarial(a))
        }
        other => Cow::Borrowed(other),
    };
    let (stats, epochs) = match env.as_ref() {
        Environment::Stochastic(inst) => (vec![crate::env::global_stats(inst)], None),
        Environment::Adversarial(a) => (
            (0..=a.i0().len() as u32).map(|s| a.conditional_stats(s)).collect(),
            Some(EpochInfo {
                epoch_length: a.epoch_length(),
                epoch_count: a.epoch_count(),
                states: a.epoch_states().to_vec(),
            }),
        ),
    };

    let model = policy.info_model();
    let gossip = policy.uses_gossip();
    let mut clients: Vec<Box<dyn ClientPolicy>> =
        (0..m).map(|_| policy.build(m, k)).collect::<Result<_, _>>()?;
    let fixed_weights: Option<WeightMatrix> = match graphs {
        TemporalGraphModel::Static(g) if gossip => Some(metropolis_weights(g)),
        _ => None,
    };

    let steps = horizon as usize;
    let mut traj = Trajectory {
        horizon,
        clients: m,
        arms: k,
        actions: Vec::with_capacity(steps * m),
        pull_counts: vec![0; m * k],
        regret_curve: Vec::with_capacity(steps),
        realized_curve: Vec::with_capacity(steps),
        stats,
        stats_index: Vec::with_capacity(steps),
        t_agree: 0,
        t_disagree: 0,
        epochs,
        run_seed,
    };
    let mut rewards = vec![0.0; m * k];
    let mut acts = vec![0usize; m];
    let mut payloads: Vec<Vec<f64>> = vec![Vec::new(); m];
    let mut mixed = Vec::new();
    let (mut cum, mut cum_realized) = (0.0, 0.0);

    for t in 1..=horizon {
        let g = graphs.graph_at(t, &mut graph_rng);
        for (a, client) in acts.iter_mut().zip(clients.iter_mut()) {
            *a = client.act(t, &mut policy_rng);
            if *a >= k {
                return Err(SimError::BadAction { arm: *a, arms: k });
            }
        }
        match &mut source {
            Source::Replay(tape) => {
                let s = (t - 1) as usize * m * k;
                rewards.copy_from_slice(&tape[s..s + m * k]);
            }
            Source::Draw => env.sample_rewards(t, &mut env_rng, &mut rewards),
            Source::Record(tape) => {
                env.sample_rewards(t, &mut env_rng, &mut rewards);
                tape.extend_from_slice(&rewards);
            }
        }

        let msgs: Vec<Message> = (0..m)
            .map(|j| Message::new(model, j, acts[j], &rewards[j * k..(j + 1) * k]))
            .collect();
        let mut neighbor_msgs: Vec<Message> = Vec::with_capacity(m);
        for (c, client) in clients.iter_mut().enumerate() {
            neighbor_msgs.clear();
            neighbor_msgs.extend(g.neighbors(c).map(|j| msgs[j]));
            debug_assert!(neighbor_msgs.iter().all(|msg| g.has_edge(c, msg.from)));
            client.observe(t, &msgs[c], &neighbor_msgs);
        }
        if gossip {
            for (p, client) in payloads.iter_mut().zip(&clients) {
                p.clear();
                p.extend_from_slice(client.gossip_payload().unwrap_or(&[]));
            }
            let w: Cow<WeightMatrix> = match &fixed_weights {
                Some(w) => Cow::Borrowed(w),
                None => Cow::Owned(metropolis_weights(&g)),
            };
            for (c, client) in clients.iter_mut().enumerate() {
                w.mix_row(c, &payloads, &mut mixed);
                client.absorb_gossip(&mixed);
            }
        }

        let si = match env.as_ref() {
            Environment::Adversarial(a) => a.state_at(t),
            Environment::Stochastic(_) => 0,
        };
        let st = &traj.stats[si as usize];
        cum += pseudo_regret_step(&acts, st);
        let got: f64 = acts.iter().enumerate().map(|(c, &a)| rewards[c * k + a]).sum::<f64>() / m as f64;
        cum_realized += st.best_mean() - got;
        traj.regret_curve.push(cum);
        traj.realized_curve.push(cum_realized);
        traj.stats_index.push(si);
        for (c, &a) in acts.iter().enumerate() {
            traj.actions.push(a as u16);
            traj.pull_counts[c * k + a] += 1;
        }
        if acts.iter().all(|&a| a == acts[0]) {
            traj.t_agree += 1;
        } else {
            traj.t_disagree += 1;
        }
    }
    let tape = match source {
        Source::Record(tape) => Some(tape),
        _ => None,
    };
    Ok((traj, tape))
}

/// Regret split by agreement and disagreement steps.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub arms: usize,
    pub t_agree: u64,
    pub t_disagree: u64,
    pub regret: f64,
    /// Regret accrued on agreement steps, `sum_{t in T_a} (mu_1 - mu_{a_t})`.
    pub agreement_sum: f64,
    /// Regret accrued on disagreement steps.
    pub disagreement_sum: f64,
    /// `sum_{t in T_d} Delta_2(t)`; equals `T_d Delta_2` on a stochastic instance.
    pub disagreement_gap_total: f64,
    /// `R - (sum_{T_d} Delta_2 + agreement_sum)`; zero only if every
    /// disagreement step costs a full gap.
    pub literal_residual: Option<f64>,
    /// `R - (disagreement_sum + agreement_sum)`.
    pub exact_residual: f64,
}

impl Decomposition {
    /// The literal two-arm identity `R = T_d Delta_2 + agreement sum`.
    pub fn literal_identity_holds(&self, tol: f64) -> Result<bool, SimError> {
        self.literal_residual
            .map(|r| r.abs() <= tol)
            .ok_or(SimError::IdentityNeedsTwoArms(self.arms))
    }

    /// On K = 2, a disagreement step puts between 1 and M - 1 clients on the
    /// worse arm, so `disagreement_sum` lies in
    /// `[gap_total / M, gap_total (M - 1) / M]`.
    pub fn sandwich_holds(&self, clients: usize, tol: f64) -> bool {
        let m = clients as f64;
        let lo = self.disagreement_gap_total / m;
        let hi = self.disagreement_gap_total * (m - 1.0) / m;
        self.disagreement_sum >= lo - tol && self.disagreement_sum <= hi + tol
    }
}

/// Counts agreement/disagreement steps and evaluates the decomposition.
/// For K != 2 the counts are still filled in and
/// [`Decomposition::literal_identity_holds`] refuses.
pub fn agreement_decomposition(traj: &Trajectory) -> Decomposition {
    let mut d = Decomposition {
        arms: traj.arms,
        t_agree: 0,
        t_disagree: 0,
        regret: traj.final_regret(),
        agreement_sum: 0.0,
        disagreement_sum: 0.0,
        disagreement_gap_total: 0.0,
        literal_residual: None,
        exact_residual: 0.0,
    };
    for t in 1..=traj.horizon {
        let r = traj.step_regret(t);
        if traj.disagrees_at(t) {
            d.t_disagree += 1;
            d.disagreement_sum += r;
            if traj.arms == 2 {
                let st = traj.stats_at(t);
                d.disagreement_gap_total += st.gaps[1 - st.optimal_arm];
            }
        } else {
            d.t_agree += 1;
            d.agreement_sum += r;
        }
    }
    d.exact_residual = d.regret - (d.disagreement_sum + d.agreement_sum);
    if traj.arms == 2 {
        d.literal_residual = Some(d.regret - (d.disagreement_gap_total + d.agreement_sum));
    }
    d
}

/// `n_{m,1}(T, j)`: pulls of the first arm by each client in each epoch.
/// Steps past the last full epoch count toward the last one.
pub fn epoch_pull_counts(traj: &Trajectory) -> Result<Vec<Vec<u64>>, SimError> {
    let info = traj.epochs.as_ref().ok_or(SimError::NotAdversarial)?;
    let epochs = info.epoch_count.max(1) as usize;
    let mut table = vec![vec![0u64; epochs]; traj.clients];
    for t in 1..=traj.horizon {
        let j = (((t - 1) / info.epoch_length) as usize).min(epochs - 1);
        for (c, &a) in traj.actions_at(t).iter().enumerate() {
            if a == 0 {
                table[c][j] += 1;
            }
        }
    }
    Ok(table)
}

/// Shuffles the rewards of every step after `t` in place.
pub fn scramble_tape_after<R: Rng + ?Sized>(tape: &mut [f64], step_width: usize, t: u64, rng: &mut R) {
    let start = t as usize * step_width;
    if start < tape.len() {
        tape[start..].shuffle(rng);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{make_thm4_instance, make_thm5_instance_with_coin, make_thm8_instance, ArmDistribution, Instance};
    use crate::graph::{make_complete_graph, make_path_graph};
    use crate::policy::InfoModel;
    use crate::rng::SimRng;
    use rand::SeedableRng;

    fn complete(m: usize) -> TemporalGraphModel {
        TemporalGraphModel::Static(make_complete_graph(m).unwrap())
    }

    fn bern_env() -> Environment {
        let row = [ArmDistribution::Bernoulli(0.7), ArmDistribution::Bernoulli(0.5)];
        Instance::homogeneous(4, &row).unwrap().into()
    }

    #[test]
    fn optimal_fixed_arm_has_zero_regret() {
        let env: Environment = make_thm4_instance(8, 1, 0.4).unwrap().into();
        let tr = run(&env, &complete(8), &PolicySpec::Fixed { arm: 0 }, 500, 1).unwrap();
        assert_eq!(tr.final_regret(), 0.0);
        tr.check_invariants().unwrap();
    }

    #[test]
    fn suboptimal_fixed_arm_is_linear() {
        let env: Environment = make_thm4_instance(8, 1, 0.4).unwrap().into();
        let tr = run(&env, &complete(8), &PolicySpec::Fixed { arm: 1 }, 1000, 1).unwrap();
        assert!((tr.final_regret() - 250.0).abs() < 1e-9, "{}", tr.final_regret());
    }

    #[test]
    fn same_seed_same_trajectory() {
        let env = bern_env();
        let p = PolicySpec::gossip_ucb(2.0).unwrap();
        let a = run(&env, &complete(4), &p, 2000, 99).unwrap();
        let b = run(&env, &complete(4), &p, 2000, 99).unwrap();
        assert_eq!(a, b);
        let mut ca = Vec::new();
        let mut cb = Vec::new();
        a.write_csv(&mut ca).unwrap();
        b.write_csv(&mut cb).unwrap();
        assert_eq!(ca, cb);
        let c = run(&env, &complete(4), &p, 2000, 100).unwrap();
        assert_ne!(a.actions, c.actions);
    }

    #[test]
    fn step_regret_examples() {
        let row = [ArmDistribution::PointMass(1.0), ArmDistribution::PointMass(0.0)];
        let inst = Instance::homogeneous(4, &row).unwrap();
        let st = crate::env::global_stats(&inst);
        assert_eq!(pseudo_regret_step(&[0, 0, 0, 0], &st), 0.0);
        assert_eq!(pseudo_regret_step(&[0, 0, 0, 1], &st), 0.25);

        let t5 = make_thm5_instance_with_coin(4, 1, 2, 1).unwrap();
        let st5 = crate::env::global_stats(&t5);
        assert!((pseudo_regret_step(&[1; 4], &st5) - 0.375).abs() < 1e-15);
        assert!((pseudo_regret_step_local(&[1; 4], &t5.mean_matrix(), &st5) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn local_accounting_can_go_negative() {
        // The clique client gains more from its own arm than the global best pays.
        let inst = make_thm4_instance(4, 1, 0.4).unwrap();
        let st = crate::env::global_stats(&inst);
        assert!(pseudo_regret_step_local(&[1, 0, 0, 0], &inst.mean_matrix(), &st) < 0.0);
        assert!(pseudo_regret_step(&[1, 0, 0, 0], &st) > 0.0);
    }

    #[test]
    fn no_lookahead_under_scrambled_future() {
        let env = bern_env();
        let graphs = complete(4);
        let policies = [
            PolicySpec::gossip_ucb(2.0).unwrap(),
            PolicySpec::exp3_gossip(1.0).unwrap(),
            PolicySpec::FullInfoLeader,
            PolicySpec::Fixed { arm: 1 },
            PolicySpec::UniformRandom,
        ];
        let horizon = 300;
        for p in &policies {
            let (base, tape) = run_recorded(&env, &graphs, p, horizon, 5).unwrap();
            let replay = run_with_tape(&env, &graphs, p, horizon, 5, &tape).unwrap();
            assert_eq!(base.actions, replay.actions, "{}", p.label());
            for cut in [0u64, 1, 50, 299] {
                let mut t2 = tape.clone();
                let mut rng = SimRng::seed_from_u64(cut);
                scramble_tape_after(&mut t2, 8, cut, &mut rng);
                let other = run_with_tape(&env, &graphs, p, horizon, 5, &t2).unwrap();
                let n = (cut as usize + 1) * 4;
                assert_eq!(base.actions[..n], other.actions[..n], "{} cut {cut}", p.label());
            }
        }
    }

    #[test]
    fn bandit_messages_subset_of_full_on_recorded_run() {
        let env = bern_env();
        let g = make_path_graph(4).unwrap();
        let graphs = TemporalGraphModel::Static(g.clone());
        let (tr, tape) = run_recorded(&env, &graphs, &PolicySpec::UniformRandom, 200, 8).unwrap();
        let k = 2;
        for t in 1..=tr.horizon {
            let acts = tr.actions_at(t);
            let s = (t - 1) as usize * 4 * k;
            for c in 0..4 {
                let mut full = Vec::new();
                let mut bandit = Vec::new();
                for j in g.closed_neighborhood(c) {
                    let row = &tape[s + j * k..s + (j + 1) * k];
                    full.extend(Message::new(InfoModel::FullNeighbors, j, acts[j] as usize, row).atoms());
                    bandit.extend(Message::new(InfoModel::BanditNeighbors, j, acts[j] as usize, row).atoms());
                }
                assert!(bandit.iter().all(|a| full.contains(a)));
            }
        }
    }

    #[test]
    fn symmetric_full_information_clients_agree() {
        let env = bern_env();
        let tr = run(&env, &complete(4), &PolicySpec::FullInfoLeader, 400, 3).unwrap();
        assert_eq!(tr.t_disagree, 0);
    }

    #[test]
    fn decomposition_counts_and_residuals() {
        let env = bern_env();
        let tr = run(&env, &complete(4), &PolicySpec::UniformRandom, 1000, 2).unwrap();
        let d = agreement_decomposition(&tr);
        assert_eq!(d.t_agree + d.t_disagree, 1000);
        assert_eq!((d.t_agree, d.t_disagree), (tr.t_agree, tr.t_disagree));
        assert!(d.exact_residual.abs() < 1e-9);
        assert!(d.sandwich_holds(4, 1e-9));
        // A disagreement step costs at most (M - 1)/M of the gap.
        assert!(d.literal_residual.unwrap() < 0.0);

        let agree = run(&env, &complete(4), &PolicySpec::Fixed { arm: 1 }, 100, 2).unwrap();
        let d = agreement_decomposition(&agree);
        assert_eq!(d.t_disagree, 0);
        assert!(d.literal_identity_holds(1e-9).unwrap());
    }

    #[test]
    fn decomposition_on_three_arms_keeps_counts() {
        let row = [
            ArmDistribution::PointMass(0.1),
            ArmDistribution::PointMass(0.5),
            ArmDistribution::PointMass(0.9),
        ];
        let env: Environment = Instance::homogeneous(3, &row).unwrap().into();
        let tr = run(&env, &complete(3), &PolicySpec::UniformRandom, 50, 2).unwrap();
        let d = agreement_decomposition(&tr);
        assert_eq!(d.t_agree + d.t_disagree, 50);
        assert!(d.literal_identity_holds(1e-9).is_err());
    }

    #[test]
    fn adversarial_horizon_must_match() {
        let a = make_thm8_instance(4, 1 << 15, 4.0).unwrap();
        let env: Environment = a.into();
        let err = run(&env, &complete(4), &PolicySpec::UniformRandom, 1000, 0).unwrap_err();
        assert!(matches!(err, SimError::HorizonMismatch { .. }));
    }

    #[test]
    fn epoch_counts() {
        let a = make_thm8_instance(4, 1 << 15, 4.0).unwrap();
        let (d, epochs) = (a.epoch_length(), a.epoch_count() as usize);
        let env: Environment = a.into();
        let g = complete(4);
        let ones = run(&env, &g, &PolicySpec::Fixed { arm: 0 }, 1 << 15, 0).unwrap();
        let table = epoch_pull_counts(&ones).unwrap();
        assert!(table.iter().all(|row| row.len() == epochs && row.iter().all(|&n| n == d)));
        let twos = run(&env, &g, &PolicySpec::Fixed { arm: 1 }, 1 << 15, 0).unwrap();
        assert!(epoch_pull_counts(&twos).unwrap().iter().flatten().all(|&n| n == 0));
        let uni = run(&env, &g, &PolicySpec::UniformRandom, 1 << 15, 0).unwrap();
        let table = epoch_pull_counts(&uni).unwrap();
        for (c, row) in table.iter().enumerate() {
            assert_eq!(row.iter().sum::<u64>(), uni.pull_counts[c * 2]);
        }
        uni.check_invariants().unwrap();

        let stoch = run(&bern_env(), &g, &PolicySpec::UniformRandom, 10, 0).unwrap();
        assert!(epoch_pull_counts(&stoch).is_err());
    }

    #[test]
    fn mismatched_graph_is_rejected() {
        assert!(matches!(
            run(&bern_env(), &complete(5), &PolicySpec::UniformRandom, 10, 0),
            Err(SimError::Dimension(_))
        ));
    }
}
