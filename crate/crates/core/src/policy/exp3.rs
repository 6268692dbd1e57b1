use rand::{Rng, RngCore};

use super::{ClientPolicy, Message};

/// `min(1, gamma0 * sqrt(K ln K / (K t)))`.
pub fn exp3_rate(gamma0: f64, arms: usize, t: u64) -> f64 {
    let k = arms as f64;
    (gamma0 * (k * k.ln() / (k * t as f64)).sqrt()).min(1.0)
}

/// EXP3 with importance-weighted own rewards and log-weight gossip.
#[derive(Clone, Debug)]
pub struct Exp3Gossip {
    gamma0: f64,
    log_weights: Vec<f64>,
    probs: Vec<f64>,
    gamma: f64,
}

impl Exp3Gossip {
    pub fn new(arms: usize, gamma0: f64) -> Self {
        Exp3Gossip {
            gamma0,
            log_weights: vec![0.0; arms],
            probs: vec![1.0 / arms as f64; arms],
            gamma: 0.0,
        }
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    fn refresh(&mut self, gamma: f64) {
        let k = self.log_weights.len() as f64;
        let top = self.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for (p, lw) in self.probs.iter_mut().zip(&self.log_weights) {
            *p = (lw - top).exp();
            total += *p;
        }
        for p in self.probs.iter_mut() {
            *p = (1.0 - gamma) * *p / total + gamma / k;
        }
    }
}

impl ClientPolicy for Exp3Gossip {
    fn act(&mut self, t: u64, rng: &mut dyn RngCore) -> usize {
        self.gamma = exp3_rate(self.gamma0, self.log_weights.len(), t);
        self.refresh(self.gamma);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.probs.len() - 1
    }

    fn observe(&mut self, _t: u64, own: &Message<'_>, _neighbors: &[Message<'_>]) {
        let k = self.log_weights.len() as f64;
        let a = own.arm;
        self.log_weights[a] += self.gamma * own.pulled_reward() / (self.probs[a] * k);
    }

    fn gossip_payload(&self) -> Option<&[f64]> {
        Some(&self.log_weights)
    }

    fn absorb_gossip(&mut self, mixed: &[f64]) {
        let top = mixed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (lw, m) in self.log_weights.iter_mut().zip(mixed) {
            *lw = m - top;
        }
    }

    fn probabilities(&self) -> Option<&[f64]> {
        Some(&self.probs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::InfoModel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_rate_stays_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut p = Exp3Gossip::new(3, 0.0);
        let row = [1.0, 0.0, 0.5];
        for t in 1..=1000 {
            let a = p.act(t, &mut rng);
            p.observe(t, &Message::new(InfoModel::BanditNeighbors, 0, a, &row), &[]);
        }
        assert_eq!(p.log_weights(), &[0.0; 3]);
        assert!(p.probabilities().unwrap().iter().all(|&q| (q - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn uniform_draws_pass_chi_square() {
        // Five arms, 1e5 draws: chi-square with 4 dof has mean 4 and sd
        // sqrt(8), so 3 sigma is about 12.5.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut p = Exp3Gossip::new(5, 0.0);
        let mut counts = [0u64; 5];
        let n = 100_000;
        for t in 1..=n {
            counts[p.act(t, &mut rng)] += 1;
        }
        let e = n as f64 / 5.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        assert!(chi2 < 4.0 + 3.0 * 8f64.sqrt(), "chi2 = {chi2}");
    }

    #[test]
    fn probabilities_stay_on_simplex() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut p = Exp3Gossip::new(2, 1.0);
        let row = [1.0, 0.0];
        for t in 1..=100_000 {
            let a = p.act(t, &mut rng);
            let probs = p.probabilities().unwrap();
            assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(probs.iter().all(|&q| q > 0.0 && q < 1.0));
            p.observe(t, &Message::new(InfoModel::BanditNeighbors, 0, a, &row), &[]);
            let lw = p.log_weights().to_vec();
            p.absorb_gossip(&lw);
        }
    }

    #[test]
    fn concentrates_on_point_mass_leader() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut p = Exp3Gossip::new(2, 1.0);
            let row = [1.0, 0.0];
            for t in 1..=10_000 {
                let a = p.act(t, &mut rng);
                p.observe(t, &Message::new(InfoModel::BanditNeighbors, 0, a, &row), &[]);
            }
            assert!(p.probabilities().unwrap()[0] > 0.99, "seed {seed}");
        }
    }

    #[test]
    fn rate_schedule() {
        assert_eq!(exp3_rate(1.0, 2, 1), (2f64.ln() / 1.0).sqrt().min(1.0));
        assert!((exp3_rate(1.0, 2, 10_000) - (2f64.ln() / 10_000.0).sqrt()).abs() < 1e-15);
        assert_eq!(exp3_rate(0.0, 4, 7), 0.0);
    }
}
