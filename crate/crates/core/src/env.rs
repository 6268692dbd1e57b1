//! Reward environments.
//!
//! Stochastic instances hold one [`ArmDistribution`] per (client, arm). The
//! three hard-instance constructions live here as well: the disconnected
//! clique instance with heterogeneous means, the latent-coin instance, and
//! the epoch-resampled adversary on the two-expander graph.
//!
//! Clients and arms are 0-indexed. In the clique constructions the clique
//! is clients `0..Q`, matching [`crate::graph::make_disconnected_clique_graph`].

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("{what} = {value} is outside [0, 1]")]
    OutOfUnitInterval { what: &'static str, value: f64 },
    #[error("instance needs at least 3 clients, got {0}")]
    TooFewClients(usize),
    #[error("instance needs at least 2 arms, got {0}")]
    TooFewArms(usize),
    #[error("ragged mean table: row {row} has {got} arms, expected {expected}")]
    Ragged { row: usize, got: usize, expected: usize },
    #[error("clique size Q = {q} must satisfy 1 <= Q < M = {m}")]
    BadClique { m: usize, q: usize },
    #[error("the disconnected-clique instance needs M > 3, got M = {0} (the gap (M-3)/M*delta would be <= 0)")]
    Thm4TooFewClients(usize),
    #[error("delta must be positive, got {0}")]
    NonPositiveDelta(f64),
    #[error("the latent-coin instance is two-armed, got K = {0}")]
    NotTwoArmed(usize),
    #[error("constraint violated: {constraint} ({detail})")]
    Constraint {
        constraint: &'static str,
        detail: String,
    },
    #[error("epoch index {epoch} out of range for {count} epochs")]
    EpochOutOfRange { epoch: usize, count: usize },
    #[error("mean table parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ArmDistribution {
    Bernoulli(f64),
    PointMass(f64),
}

impl ArmDistribution {
    pub fn bernoulli(p: f64) -> Result<Self, EnvError> {
        unit("Bernoulli parameter", p).map(ArmDistribution::Bernoulli)
    }

    pub fn point_mass(v: f64) -> Result<Self, EnvError> {
        unit("point mass", v).map(ArmDistribution::PointMass)
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ArmDistribution::Bernoulli(p) | ArmDistribution::PointMass(p) => p,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ArmDistribution::Bernoulli(p) => {
                if rng.random::<f64>() < p {
                    1.0
                } else {
                    0.0
                }
            }
            ArmDistribution::PointMass(v) => v,
        }
    }
}

fn unit(what: &'static str, value: f64) -> Result<f64, EnvError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(EnvError::OutOfUnitInterval { what, value })
    }
}

/// Latent coin of the two-armed instance, drawn once per run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatentCoinState {
    pub x: u8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    label: String,
    clients: usize,
    arms: usize,
    dists: Vec<ArmDistribution>,
    latent: Option<LatentCoinState>,
}

impl Instance {
    pub fn new(label: impl Into<String>, rows: Vec<Vec<ArmDistribution>>) -> Result<Self, EnvError> {
        let clients = rows.len();
        if clients < 3 {
            return Err(EnvError::TooFewClients(clients));
        }
        let arms = rows[0].len();
        if arms < 2 {
            return Err(EnvError::TooFewArms(arms));
        }
        let mut dists = Vec::with_capacity(clients * arms);
        for (row, r) in rows.into_iter().enumerate() {
            if r.len() != arms {
                return Err(EnvError::Ragged {
                    row,
                    got: r.len(),
                    expected: arms,
                });
            }
            for d in r {
                unit("arm mean", d.mean())?;
                dists.push(d);
            }
        }
        Ok(Instance {
            label: label.into(),
            clients,
            arms,
            dists,
            latent: None,
        })
    }

    /// Every client shares the same per-arm distributions.
    pub fn homogeneous(clients: usize, row: &[ArmDistribution]) -> Result<Self, EnvError> {
        let label = format!(
            "homogeneous(M={clients}, means=[{}])",
            row.iter().map(|d| d.mean().to_string()).collect::<Vec<_>>().join(",")
        );
        Instance::new(label, vec![row.to_vec(); clients])
    }

    /// Whitespace- or comma-separated table of Bernoulli means, one client
    /// per row.
    pub fn from_means_table(label: impl Into<String>, text: &str) -> Result<Self, EnvError> {
        let mut rows = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    let v: f64 = s.parse().map_err(|_| EnvError::Parse {
                        line: n + 1,
                        msg: format!("bad number {s:?}"),
                    })?;
                    ArmDistribution::bernoulli(v)
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Instance::new(label, rows)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn client_count(&self) -> usize {
        self.clients
    }

    pub fn arm_count(&self) -> usize {
        self.arms
    }

    pub fn dist(&self, client: usize, arm: usize) -> ArmDistribution {
        self.dists[client * self.arms + arm]
    }

    pub fn latent(&self) -> Option<LatentCoinState> {
        self.latent
    }

    /// Per-client means mu_i^m, row-major M x K.
    pub fn mean_matrix(&self) -> Vec<f64> {
        self.dists.iter().map(ArmDistribution::mean).collect()
    }

    /// Number of (client, arm) entries that are not point masses.
    pub fn stochastic_entries(&self) -> Vec<(usize, usize)> {
        (0..self.clients)
            .flat_map(|m| (0..self.arms).map(move |i| (m, i)))
            .filter(|&(m, i)| matches!(self.dist(m, i), ArmDistribution::Bernoulli(_)))
            .collect()
    }

    pub fn sample_rewards<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for (o, d) in out.iter_mut().zip(&self.dists) {
            *o = d.sample(rng);
        }
    }
}

/// Global means, the optimal arm, and the suboptimality gaps.
#[derive(Clone, Debug, PartialEq)]
pub struct GlobalStats {
    pub global_means: Vec<f64>,
    pub optimal_arm: usize,
    pub gaps: Vec<f64>,
}

impl GlobalStats {
    /// From a row-major M x K matrix of per-client means. Ties on the
    /// optimal arm go to the lowest index.
    pub fn from_mean_matrix(clients: usize, arms: usize, means: &[f64]) -> GlobalStats {
        let global_means: Vec<f64> = (0..arms)
            .map(|i| (0..clients).map(|m| means[m * arms + i]).sum::<f64>() / clients as f64)
            .collect();
        let mut optimal_arm = 0;
        for (i, &mu) in global_means.iter().enumerate() {
            if mu > global_means[optimal_arm] {
                optimal_arm = i;
            }
        }
        let best = global_means[optimal_arm];
        let gaps = global_means.iter().map(|mu| best - mu).collect();
        GlobalStats {
            global_means,
            optimal_arm,
            gaps,
        }
    }

    pub fn best_mean(&self) -> f64 {
        self.global_means[self.optimal_arm]
    }
}

pub fn global_stats(inst: &Instance) -> GlobalStats {
    GlobalStats::from_mean_matrix(inst.clients, inst.arms, &inst.mean_matrix())
}

/// Disconnected-clique instance with K = 2.
pub fn make_thm4_instance(m: usize, q: usize, delta: f64) -> Result<Instance, EnvError> {
    make_thm4_instance_with_arms(m, q, delta, 2)
}

/// Clients outside the clique `0..q` see means `((M-1)/(M-Q) delta, 0, ..)`,
/// clique clients see `(0, 2 delta / Q, 0, ..)`. The global gap of arm 2 is
/// `(M-3) delta / M`.
pub fn make_thm4_instance_with_arms(
    m: usize,
    q: usize,
    delta: f64,
    arms: usize,
) -> Result<Instance, EnvError> {
    if m <= 3 {
        return Err(EnvError::Thm4TooFewClients(m));
    }
    if q == 0 || q >= m {
        return Err(EnvError::BadClique { m, q });
    }
    if arms < 2 {
        return Err(EnvError::TooFewArms(arms));
    }
    if delta.is_nan() || delta <= 0.0 {
        return Err(EnvError::NonPositiveDelta(delta));
    }
    let outside = unit("outside-clique mean (M-1)/(M-Q)*delta", (m - 1) as f64 / (m - q) as f64 * delta)?;
    let inside = unit("clique mean 2*delta/Q", 2.0 * delta / q as f64)?;
    let rows = (0..m)
        .map(|c| {
            let mut row = vec![ArmDistribution::PointMass(0.0); arms];
            if c < q {
                row[1] = ArmDistribution::PointMass(inside);
            } else {
                row[0] = ArmDistribution::PointMass(outside);
            }
            row
        })
        .collect();
    Instance::new(format!("thm4(M={m}, Q={q}, delta={delta})"), rows)
}

/// Latent-coin instance with the coin drawn uniformly from {0, 1}.
pub fn make_thm5_instance<R: Rng + ?Sized>(
    m: usize,
    q: usize,
    arms: usize,
    rng: &mut R,
) -> Result<Instance, EnvError> {
    let x = rng.random_range(0..2u8);
    make_thm5_instance_with_coin(m, q, arms, x)
}

/// Outside the clique: arm 1 pays `x`, arm 2 pays 1/2. Inside: both pay 1/2.
pub fn make_thm5_instance_with_coin(m: usize, q: usize, arms: usize, x: u8) -> Result<Instance, EnvError> {
    if arms != 2 {
        return Err(EnvError::NotTwoArmed(arms));
    }
    if m < 3 {
        return Err(EnvError::TooFewClients(m));
    }
    if q == 0 || q >= m {
        return Err(EnvError::BadClique { m, q });
    }
    let half = ArmDistribution::PointMass(0.5);
    let rows = (0..m)
        .map(|c| {
            if c < q {
                vec![half, half]
            } else {
                vec![ArmDistribution::PointMass(f64::from(x.min(1))), half]
            }
        })
        .collect();
    let mut inst = Instance::new(format!("thm5(M={m}, Q={q})"), rows)?;
    inst.latent = Some(LatentCoinState { x: x.min(1) });
    Ok(inst)
}

/// Epoch-resampled adversary on the two-expander graph.
///
/// Within epoch `j` the favored client `X_j` (if nonzero) has arm 1 drawn
/// from Bernoulli(1/2 + eps); every other client of `I0` draws both arms
/// from Bernoulli(1/2); clients outside `I0` always receive 0.
#[derive(Clone, Debug, PartialEq)]
pub struct AdversarialEpochInstance {
    clients: usize,
    horizon: u64,
    eta: f64,
    epsilon: f64,
    epoch_length: u64,
    epoch_count: u64,
    i0: Vec<usize>,
    i1: Vec<usize>,
    /// `X_j` per epoch: 0 means nobody is favored, `k >= 1` favors client `k - 1`.
    epoch_states: Vec<u32>,
}

fn violated(constraint: &'static str, detail: String) -> EnvError {
    EnvError::Constraint { constraint, detail }
}

/// `eps = sqrt(4 / eta) * (M^2 / 2) * T^(-1/3)` with `d = ceil(eta M / 8)`.
pub fn make_thm8_instance(m: usize, horizon: u64, eta: f64) -> Result<AdversarialEpochInstance, EnvError> {
    if m == 0 || !m.is_multiple_of(4) {
        return Err(violated("M mod 4 = 0", format!("M = {m}")));
    }
    if horizon <= 8 {
        return Err(violated("T > 8", format!("T = {horizon}")));
    }
    if !(eta > 0.0 && eta <= 4.0) {
        return Err(violated("0 < η ≤ 4", format!("η = {eta}")));
    }
    let mf = m as f64;
    let epsilon = (4.0 / eta).sqrt() * (mf * mf / 2.0) / (horizon as f64).cbrt();
    let epoch_length = (eta * mf / 8.0).ceil() as u64;
    if epsilon > 0.25 {
        return Err(violated("ε ≤ 1/4", format!("ε = {epsilon}")));
    }
    let budget = 8.0 * epsilon * epsilon * epoch_length as f64;
    if budget > 1.0 {
        return Err(violated("8ε²d ≤ 1", format!("8ε²d = {budget}")));
    }
    let epoch_count = horizon / epoch_length;
    let quarter = m / 4;
    Ok(AdversarialEpochInstance {
        clients: m,
        horizon,
        eta,
        epsilon,
        epoch_length,
        epoch_count,
        i0: (0..quarter).collect(),
        i1: (m - quarter..m).collect(),
        epoch_states: vec![0; epoch_count as usize],
    })
}

impl AdversarialEpochInstance {
    pub fn client_count(&self) -> usize {
        self.clients
    }

    pub fn arm_count(&self) -> usize {
        2
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn epoch_length(&self) -> u64 {
        self.epoch_length
    }

    pub fn epoch_count(&self) -> u64 {
        self.epoch_count
    }

    pub fn i0(&self) -> &[usize] {
        &self.i0
    }

    pub fn i1(&self) -> &[usize] {
        &self.i1
    }

    pub fn epoch_states(&self) -> &[u32] {
        &self.epoch_states
    }

    pub fn label(&self) -> String {
        format!("thm8(M={}, T={}, eta={})", self.clients, self.horizon, self.eta)
    }

    /// `8 eps^2 d`, at most 1 by construction.
    pub fn kl_budget(&self) -> f64 {
        8.0 * self.epsilon * self.epsilon * self.epoch_length as f64
    }

    /// Draws `X_epoch` uniformly from `{0, .., |I0|}` (0-based epoch index).
    pub fn resample_epoch_state<R: Rng + ?Sized>(&mut self, epoch: usize, rng: &mut R) -> Result<u32, EnvError> {
        let count = self.epoch_states.len();
        let slot = self
            .epoch_states
            .get_mut(epoch)
            .ok_or(EnvError::EpochOutOfRange { epoch, count })?;
        *slot = rng.random_range(0..=self.i0.len() as u32);
        Ok(*slot)
    }

    /// Resamples every epoch in order.
    pub fn materialize<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for j in 0..self.epoch_states.len() {
            let _ = self.resample_epoch_state(j, rng);
        }
    }

    /// 0-based epoch of the 1-based step `t`; the trailing partial epoch
    /// reuses the last state.
    pub fn epoch_of_step(&self, t: u64) -> usize {
        let j = (t.max(1) - 1) / self.epoch_length;
        j.min(self.epoch_count.saturating_sub(1)) as usize
    }

    /// Favored client at step `t`, if any.
    pub fn favored_client(&self, t: u64) -> Option<usize> {
        match self.state_at(t) {
            0 => None,
            k => Some(self.i0[k as usize - 1]),
        }
    }

    /// Per-client means averaged over the uniform epoch variable.
    pub fn mean_matrix(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.clients * 2];
        let boost = self.epsilon / (self.i0.len() as f64 + 1.0);
        for &c in &self.i0 {
            means[c * 2] = 0.5 + boost;
            means[c * 2 + 1] = 0.5;
        }
        means
    }

    pub fn global_stats(&self) -> GlobalStats {
        GlobalStats::from_mean_matrix(self.clients, 2, &self.mean_matrix())
    }

    /// Per-client means given the epoch state (0 = nobody favored).
    pub fn conditional_mean_matrix(&self, state: u32) -> Vec<f64> {
        let mut means = vec![0.0; self.clients * 2];
        for (k, &c) in self.i0.iter().enumerate() {
            let favored = state as usize == k + 1;
            means[c * 2] = if favored { 0.5 + self.epsilon } else { 0.5 };
            means[c * 2 + 1] = 0.5;
        }
        means
    }

    pub fn conditional_stats(&self, state: u32) -> GlobalStats {
        GlobalStats::from_mean_matrix(self.clients, 2, &self.conditional_mean_matrix(state))
    }

    /// Epoch state in force at step `t`.
    pub fn state_at(&self, t: u64) -> u32 {
        self.epoch_states.get(self.epoch_of_step(t)).copied().unwrap_or(0)
    }

    pub fn sample_rewards<R: Rng + ?Sized>(&self, t: u64, rng: &mut R, out: &mut [f64]) {
        out.fill(0.0);
        let favored = self.favored_client(t);
        for &c in &self.i0 {
            let p1 = if Some(c) == favored { 0.5 + self.epsilon } else { 0.5 };
            out[c * 2] = ArmDistribution::Bernoulli(p1).sample(rng);
            out[c * 2 + 1] = ArmDistribution::Bernoulli(0.5).sample(rng);
        }
    }
}

/// Anything the simulator can run against.
#[derive(Clone, Debug, PartialEq)]
pub enum Environment {
    Stochastic(Instance),
    Adversarial(AdversarialEpochInstance),
}

impl Environment {
    pub fn client_count(&self) -> usize {
        match self {
            Environment::Stochastic(i) => i.client_count(),
            Environment::Adversarial(a) => a.client_count(),
        }
    }

    pub fn arm_count(&self) -> usize {
        match self {
            Environment::Stochastic(i) => i.arm_count(),
            Environment::Adversarial(a) => a.arm_count(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Environment::Stochastic(i) => i.label().to_string(),
            Environment::Adversarial(a) => a.label(),
        }
    }

    /// Per-client means used for regret accounting.
    pub fn mean_matrix(&self) -> Vec<f64> {
        match self {
            Environment::Stochastic(i) => i.mean_matrix(),
            Environment::Adversarial(a) => a.mean_matrix(),
        }
    }

    pub fn global_stats(&self) -> GlobalStats {
        match self {
            Environment::Stochastic(i) => global_stats(i),
            Environment::Adversarial(a) => a.global_stats(),
        }
    }

    pub fn sample_rewards<R: Rng + ?Sized>(&self, t: u64, rng: &mut R, out: &mut [f64]) {
        match self {
            Environment::Stochastic(i) => i.sample_rewards(rng, out),
            Environment::Adversarial(a) => a.sample_rewards(t, rng, out),
        }
    }
}

impl From<Instance> for Environment {
    fn from(i: Instance) -> Self {
        Environment::Stochastic(i)
    }
}

impl From<AdversarialEpochInstance> for Environment {
    fn from(a: AdversarialEpochInstance) -> Self {
        Environment::Adversarial(a)
    }
}
