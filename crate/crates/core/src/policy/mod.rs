//! Per-client decision rules.
//!
//! A policy declares an [`InfoModel`]. After each step the simulator hands
//! every client its own [`Message`] plus one per neighbor in G_t. Under
//! [`InfoModel::BanditNeighbors`] a message carries the sender's pulled arm
//! and that arm's reward. Under [`InfoModel::FullNeighbors`] it also carries
//! every arm's reward.
//!
//! Gossip policies additionally expose a numeric payload that the simulator
//! mixes through the step's [`crate::graph::WeightMatrix`].

mod enumerate;
mod exp3;
mod leader;
mod ucb;

use rand::{Rng, RngCore};
use thiserror::Error;

pub use enumerate::{enumerate_min_regret, Enumeration};
pub use exp3::{exp3_rate, Exp3Gossip};
pub use leader::FullInfoLeader;
pub use ucb::GossipUcb;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("fixed arm {arm} out of range for {arms} arms")]
    ArmOutOfRange { arm: usize, arms: usize },
    #[error("{0} must be finite and non-negative")]
    BadParameter(&'static str),
    #[error("instance is not enumerable: {0}")]
    NotEnumerable(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InfoModel {
    BanditNeighbors,
    FullNeighbors,
}

impl InfoModel {
    pub fn name(self) -> &'static str {
        match self {
            InfoModel::BanditNeighbors => "bandit_neighbors",
            InfoModel::FullNeighbors => "full_neighbors",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Observed<'a> {
    /// Reward of the pulled arm only.
    Pulled(f64),
    /// Rewards of every arm at the sender.
    AllArms(&'a [f64]),
}

/// What a client learns about one neighbor (or itself) after a step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Message<'a> {
    pub from: usize,
    pub arm: usize,
    pub observed: Observed<'a>,
}

impl<'a> Message<'a> {
    /// Builds the message `from` emits under `model`, given its row of the
    /// step's reward matrix.
    pub fn new(model: InfoModel, from: usize, arm: usize, rewards: &'a [f64]) -> Self {
        let observed = match model {
            InfoModel::BanditNeighbors => Observed::Pulled(rewards[arm]),
            InfoModel::FullNeighbors => Observed::AllArms(rewards),
        };
        Message { from, arm, observed }
    }

    pub fn pulled_reward(&self) -> f64 {
        match self.observed {
            Observed::Pulled(r) => r,
            Observed::AllArms(rs) => rs[self.arm],
        }
    }

    /// `(sender, pulled arm, arm, reward)` atoms carried by the message.
    pub fn atoms(&self) -> Vec<(usize, usize, usize, u64)> {
        match self.observed {
            Observed::Pulled(r) => vec![(self.from, self.arm, self.arm, r.to_bits())],
            Observed::AllArms(rs) => rs
                .iter()
                .enumerate()
                .map(|(i, r)| (self.from, self.arm, i, r.to_bits()))
                .collect(),
        }
    }
}

/// State and decision rule of one client.
///
/// `act` at step `t` may only depend on messages observed through `t - 1`.
pub trait ClientPolicy: Send {
    fn act(&mut self, t: u64, rng: &mut dyn RngCore) -> usize;

    /// `neighbors` excludes the client itself.
    fn observe(&mut self, t: u64, own: &Message<'_>, neighbors: &[Message<'_>]);

    /// Vector to mix with neighbors after `observe`.
    fn gossip_payload(&self) -> Option<&[f64]> {
        None
    }

    /// Receives `sum_j W_mj payload_j`.
    fn absorb_gossip(&mut self, _mixed: &[f64]) {}

    /// Current per-arm value estimates, when the policy keeps any.
    fn estimates(&self) -> Option<&[f64]> {
        None
    }

    /// Current sampling distribution, for randomized policies.
    fn probabilities(&self) -> Option<&[f64]> {
        None
    }
}

/// Index of the largest value; ties go to the lowest index.
pub(crate) fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in values.into_iter().enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

/// Configured policy, instantiated once per client.
#[derive(Clone, Debug, PartialEq)]
pub enum PolicySpec {
    GossipUcb { exploration: f64 },
    Exp3Gossip { gamma0: f64 },
    FullInfoLeader,
    Fixed { arm: usize },
    UniformRandom,
}

impl PolicySpec {
    pub fn gossip_ucb(exploration: f64) -> Result<Self, PolicyError> {
        if !(exploration.is_finite() && exploration >= 0.0) {
            return Err(PolicyError::BadParameter("exploration constant C"));
        }
        Ok(PolicySpec::GossipUcb { exploration })
    }

    pub fn exp3_gossip(gamma0: f64) -> Result<Self, PolicyError> {
        if !(gamma0.is_finite() && gamma0 >= 0.0) {
            return Err(PolicyError::BadParameter("gamma0"));
        }
        Ok(PolicySpec::Exp3Gossip { gamma0 })
    }

    pub fn info_model(&self) -> InfoModel {
        match self {
            PolicySpec::FullInfoLeader => InfoModel::FullNeighbors,
            _ => InfoModel::BanditNeighbors,
        }
    }

    pub fn uses_gossip(&self) -> bool {
        matches!(self, PolicySpec::GossipUcb { .. } | PolicySpec::Exp3Gossip { .. })
    }

    pub fn label(&self) -> String {
        match self {
            PolicySpec::GossipUcb { exploration } => format!("gossip_ucb(C={exploration})"),
            PolicySpec::Exp3Gossip { gamma0 } => format!("exp3_gossip(gamma0={gamma0})"),
            PolicySpec::FullInfoLeader => "full_info_leader".into(),
            PolicySpec::Fixed { arm } => format!("fixed({})", arm + 1),
            PolicySpec::UniformRandom => "uniform_random".into(),
        }
    }

    pub fn build(&self, clients: usize, arms: usize) -> Result<Box<dyn ClientPolicy>, PolicyError> {
        Ok(match *self {
            PolicySpec::GossipUcb { exploration } => Box::new(GossipUcb::new(arms, exploration)),
            PolicySpec::Exp3Gossip { gamma0 } => Box::new(Exp3Gossip::new(arms, gamma0)),
            PolicySpec::FullInfoLeader => Box::new(FullInfoLeader::new(clients, arms)),
            PolicySpec::Fixed { arm } => {
                if arm >= arms {
                    return Err(PolicyError::ArmOutOfRange { arm, arms });
                }
                Box::new(FixedArm(arm))
            }
            PolicySpec::UniformRandom => Box::new(UniformRandom(arms)),
        })
    }
}

#[derive(Clone, Debug)]
pub struct FixedArm(pub usize);

impl ClientPolicy for FixedArm {
    fn act(&mut self, _t: u64, _rng: &mut dyn RngCore) -> usize {
        self.0
    }

    fn observe(&mut self, _t: u64, _own: &Message<'_>, _neighbors: &[Message<'_>]) {}
}

#[derive(Clone, Debug)]
pub struct UniformRandom(pub usize);

impl ClientPolicy for UniformRandom {
    fn act(&mut self, _t: u64, rng: &mut dyn RngCore) -> usize {
        rng.random_range(0..self.0)
    }

    fn observe(&mut self, _t: u64, _own: &Message<'_>, _neighbors: &[Message<'_>]) {}
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixed_arm_always_plays_k() {
        let mut p = PolicySpec::Fixed { arm: 1 }.build(3, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!((1..100).all(|t| p.act(t, &mut rng) == 1));
        assert!(PolicySpec::Fixed { arm: 2 }.build(3, 2).is_err());
    }

    #[test]
    fn bandit_atoms_are_subset_of_full_atoms() {
        let rewards = [0.0, 1.0, 0.5];
        let b = Message::new(InfoModel::BanditNeighbors, 2, 1, &rewards);
        let f = Message::new(InfoModel::FullNeighbors, 2, 1, &rewards);
        let full = f.atoms();
        assert!(b.atoms().iter().all(|a| full.contains(a)));
        assert_eq!(b.pulled_reward(), f.pulled_reward());
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax([1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax([f64::NEG_INFINITY, f64::NEG_INFINITY]), 0);
        assert_eq!(argmax([0.0, f64::INFINITY, f64::INFINITY]), 1);
    }

    #[test]
    fn info_models() {
        assert_eq!(PolicySpec::FullInfoLeader.info_model(), InfoModel::FullNeighbors);
        assert_eq!(PolicySpec::UniformRandom.info_model(), InfoModel::BanditNeighbors);
        assert!(PolicySpec::gossip_ucb(-1.0).is_err());
        assert!(PolicySpec::exp3_gossip(f64::NAN).is_err());
    }
}
