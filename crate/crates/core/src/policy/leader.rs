use rand::RngCore;

use super::{argmax, ClientPolicy, Message, Observed};

/// Follow-the-leader on full-information neighbor observations.
///
/// Keeps per-source running means of every arm. The estimate of arm `i` is
/// the average, over sources seen so far, of their means for `i`.
#[derive(Clone, Debug)]
pub struct FullInfoLeader {
    arms: usize,
    sums: Vec<f64>,
    counts: Vec<u64>,
    estimates: Vec<f64>,
}

impl FullInfoLeader {
    pub fn new(clients: usize, arms: usize) -> Self {
        FullInfoLeader {
            arms,
            sums: vec![0.0; clients * arms],
            counts: vec![0; clients * arms],
            estimates: vec![0.0; arms],
        }
    }

    fn absorb(&mut self, msg: &Message<'_>) {
        let base = msg.from * self.arms;
        match msg.observed {
            Observed::AllArms(rs) => {
                for (i, r) in rs.iter().enumerate() {
                    self.sums[base + i] += r;
                    self.counts[base + i] += 1;
                }
            }
            Observed::Pulled(r) => {
                self.sums[base + msg.arm] += r;
                self.counts[base + msg.arm] += 1;
            }
        }
    }

    fn recompute(&mut self) {
        let sources = self.counts.len() / self.arms;
        for i in 0..self.arms {
            let mut acc = 0.0;
            let mut seen = 0usize;
            for s in 0..sources {
                let n = self.counts[s * self.arms + i];
                if n > 0 {
                    acc += self.sums[s * self.arms + i] / n as f64;
                    seen += 1;
                }
            }
            self.estimates[i] = if seen == 0 { f64::NEG_INFINITY } else { acc / seen as f64 };
        }
    }
}

impl ClientPolicy for FullInfoLeader {
    fn act(&mut self, _t: u64, _rng: &mut dyn RngCore) -> usize {
        argmax(self.estimates.iter().copied())
    }

    fn observe(&mut self, _t: u64, own: &Message<'_>, neighbors: &[Message<'_>]) {
        self.absorb(own);
        for msg in neighbors {
            self.absorb(msg);
        }
        self.recompute();
    }

    fn estimates(&self) -> Option<&[f64]> {
        Some(&self.estimates)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::InfoModel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn first_step_plays_lowest_index() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(FullInfoLeader::new(3, 4).act(1, &mut rng), 0);
    }

    #[test]
    fn locks_on_global_best_from_step_two() {
        // Client rows differ; arm 1 is best on average only.
        let rows = [[0.9, 0.0], [0.0, 0.6], [0.9, 0.6]];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut clients: Vec<FullInfoLeader> = (0..3).map(|_| FullInfoLeader::new(3, 2)).collect();
        for t in 1..=5 {
            let acts: Vec<usize> = clients.iter_mut().map(|p| p.act(t, &mut rng)).collect();
            if t >= 2 {
                assert_eq!(acts, vec![0; 3]);
            }
            let msgs: Vec<Message> = (0..3)
                .map(|j| Message::new(InfoModel::FullNeighbors, j, acts[j], &rows[j]))
                .collect();
            for (i, p) in clients.iter_mut().enumerate() {
                let others: Vec<Message> = msgs.iter().filter(|m| m.from != i).copied().collect();
                p.observe(t, &msgs[i], &others);
            }
        }
        assert!((clients[0].estimates().unwrap()[0] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn isolated_client_is_local_leader() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut p = FullInfoLeader::new(2, 3);
        let row = [0.1, 0.3, 0.3];
        p.observe(1, &Message::new(InfoModel::FullNeighbors, 1, 0, &row), &[]);
        assert_eq!(p.act(2, &mut rng), 1);
    }
}
