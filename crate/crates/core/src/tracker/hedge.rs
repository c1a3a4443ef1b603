use crate::error::{Error, Result};

/// AdaHedge over `k` actions with gains.
///
/// Weights are exponential in the cumulative rewards with learning rate
/// η = ln k / Δ, where Δ is the cumulative mix gap. Before any positive gap
/// (Δ = 0, η = ∞) the weights follow the leader: uniform over the actions
/// with the largest cumulative reward.
#[derive(Clone, Debug)]
pub struct AdaHedge {
    cum: Vec<f64>,
    gap: f64,
}

impl AdaHedge {
    pub fn new(k: usize) -> Self {
        assert!(k > 0, "hedge needs at least one action");
        Self {
            cum: vec![0.0; k],
            gap: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.cum.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cum.is_empty()
    }

    /// Current learning rate; `inf` before the first positive mix gap.
    pub fn eta(&self) -> f64 {
        if self.gap > 0.0 {
            (self.cum.len() as f64).ln() / self.gap
        } else {
            f64::INFINITY
        }
    }

    pub fn cumulative_gap(&self) -> f64 {
        self.gap
    }

    pub fn cumulative_rewards(&self) -> &[f64] {
        &self.cum
    }

    pub fn weights(&self) -> Vec<f64> {
        let k = self.cum.len();
        if k == 1 {
            return vec![1.0];
        }
        let max = self.cum.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let eta = self.eta();
        let mut w: Vec<f64> = if eta.is_infinite() {
            self.cum
                .iter()
                .map(|&c| if c == max { 1.0 } else { 0.0 })
                .collect()
        } else {
            self.cum.iter().map(|&c| (eta * (c - max)).exp()).collect()
        };
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        w
    }

    /// Feeds one reward vector and returns the weights that were played.
    pub fn step(&mut self, rewards: &[f64]) -> Result<Vec<f64>> {
        if rewards.len() != self.cum.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} rewards, got {}",
                self.cum.len(),
                rewards.len()
            )));
        }
        let w = self.weights();
        let hedge: f64 = w.iter().zip(rewards).map(|(a, b)| a * b).sum();
        let eta = self.eta();
        let mix = if eta.is_infinite() {
            w.iter()
                .zip(rewards)
                .filter(|(&wi, _)| wi > 0.0)
                .map(|(_, &r)| r)
                .fold(f64::NEG_INFINITY, f64::max)
        } else {
            let rmax = rewards.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let s: f64 = w
                .iter()
                .zip(rewards)
                .map(|(&wi, &r)| wi * (eta * (r - rmax)).exp())
                .sum();
            rmax + s.ln() / eta
        };
        self.gap += (mix - hedge).max(0.0);
        for (c, r) in self.cum.iter_mut().zip(rewards) {
            *c += r;
        }
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn starts_uniform() {
        let h = AdaHedge::new(4);
        assert_eq!(h.weights(), vec![0.25; 4]);
    }

    #[test]
    fn equal_rewards_keep_uniform() {
        let mut h = AdaHedge::new(3);
        for _ in 0..50 {
            h.step(&[0.7, 0.7, 0.7]).unwrap();
        }
        for w in h.weights() {
            assert!((w - 1.0 / 3.0).abs() < 1e-12);
        }
        assert_eq!(h.cumulative_gap(), 0.0);
    }

    #[test]
    fn length_mismatch() {
        let mut h = AdaHedge::new(3);
        assert!(h.step(&[1.0]).is_err());
    }

    #[test]
    fn regret_bound_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let k = rng.random_range(2..=16);
            let d: f64 = rng.random_range(0.5..5.0);
            let t = 1000;
            let mut h = AdaHedge::new(k);
            let mut got = 0.0;
            for _ in 0..t {
                let r: Vec<f64> = (0..k).map(|_| d * rng.random::<f64>()).collect();
                let w = h.step(&r).unwrap();
                got += w.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>();
            }
            let best = h.cumulative_rewards().iter().copied().fold(0.0, f64::max);
            let lk = (k as f64).ln();
            let bound = (d * t as f64 * lk).sqrt() + d * (4.0 / 3.0 * lk + 2.0);
            assert!(best - got <= bound, "regret {} > {bound}", best - got);
        }
    }
}
