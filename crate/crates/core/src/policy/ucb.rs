use rand::RngCore;

use super::{argmax, ClientPolicy, Message};

/// UCB on running-consensus estimates of the global means.
///
/// Each client keeps sample means `x` of its own pulls. The consensus vector
/// follows `z <- W (z + x - x_prev)`, so its network average tracks the
/// average of the local means. Confidence widths use the pooled count of
/// pulls seen in the client's own and its neighbors' messages.
#[derive(Clone, Debug)]
pub struct GossipUcb {
    exploration: f64,
    own_sums: Vec<f64>,
    own_counts: Vec<u64>,
    local: Vec<f64>,
    consensus: Vec<f64>,
    pooled: Vec<u64>,
}

impl GossipUcb {
    pub fn new(arms: usize, exploration: f64) -> Self {
        GossipUcb {
            exploration,
            own_sums: vec![0.0; arms],
            own_counts: vec![0; arms],
            local: vec![0.0; arms],
            consensus: vec![0.0; arms],
            pooled: vec![0; arms],
        }
    }

    pub fn consensus(&self) -> &[f64] {
        &self.consensus
    }

    pub fn pooled_counts(&self) -> &[u64] {
        &self.pooled
    }

    pub fn own_counts(&self) -> &[u64] {
        &self.own_counts
    }

    fn index(&self, arm: usize, log_t: f64) -> f64 {
        let n = self.pooled[arm];
        if n == 0 {
            return f64::INFINITY;
        }
        self.consensus[arm] + (self.exploration * log_t / n as f64).sqrt()
    }
}

impl ClientPolicy for GossipUcb {
    fn act(&mut self, t: u64, _rng: &mut dyn RngCore) -> usize {
        let arms = self.consensus.len();
        if t <= arms as u64 {
            return (t - 1) as usize;
        }
        let log_t = (t as f64).ln();
        argmax((0..arms).map(|i| self.index(i, log_t)))
    }

    fn observe(&mut self, _t: u64, own: &Message<'_>, neighbors: &[Message<'_>]) {
        let a = own.arm;
        self.own_sums[a] += own.pulled_reward();
        self.own_counts[a] += 1;
        let fresh = self.own_sums[a] / self.own_counts[a] as f64;
        self.consensus[a] += fresh - self.local[a];
        self.local[a] = fresh;
        self.pooled[a] += 1;
        for msg in neighbors {
            self.pooled[msg.arm] += 1;
        }
    }

    fn gossip_payload(&self) -> Option<&[f64]> {
        Some(&self.consensus)
    }

    fn absorb_gossip(&mut self, mixed: &[f64]) {
        self.consensus.copy_from_slice(mixed);
    }

    fn estimates(&self) -> Option<&[f64]> {
        Some(&self.consensus)
    }
}
