//! Replay memory: a ring buffer with optional proportional prioritization.

use rand::Rng;

use crate::agent::Experience;

/// Binary tree whose internal nodes hold the sums of their leaves.
#[derive(Debug, Clone, PartialEq)]
pub struct SumTree {
    leaves: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    pub fn new(capacity: usize) -> Self {
        let leaves = capacity.max(1).next_power_of_two();
        Self {
            leaves,
            nodes: vec![0.0; 2 * leaves],
        }
    }

    pub fn total(&self) -> f64 {
        self.nodes[1]
    }

    pub fn get(&self, i: usize) -> f64 {
        self.nodes[self.leaves + i]
    }

    pub fn set(&mut self, i: usize, value: f64) {
        let mut k = self.leaves + i;
        self.nodes[k] = value;
        while k > 1 {
            k /= 2;
            self.nodes[k] = self.nodes[2 * k] + self.nodes[2 * k + 1];
        }
    }

    /// Leaf whose cumulative range contains `u` in `[0, total)`.
    pub fn find(&self, mut u: f64) -> usize {
        let mut k = 1;
        while k < self.leaves {
            let left = self.nodes[2 * k];
            if u < left || self.nodes[2 * k + 1] <= 0.0 {
                k *= 2;
            } else {
                u -= left;
                k = 2 * k + 1;
            }
        }
        k - self.leaves
    }
}

/// Importance-sampling weights `(N·P(i))^(−β)` normalized by their maximum.
pub fn importance_weights(probabilities: &[f64], n: usize, beta: f64) -> Vec<f64> {
    let raw: Vec<f64> = probabilities
        .iter()
        .map(|p| (n as f64 * p).powf(-beta))
        .collect();
    let max = raw.iter().cloned().fold(f64::MIN, f64::max);
    raw.iter().map(|w| w / max).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ReplayMemory {
    capacity: usize,
    items: Vec<Experience>,
    next: usize,
    /// Present when prioritized: leaves hold `priority^α`.
    tree: Option<SumTree>,
    alpha: f64,
    max_priority: f64,
}

impl ReplayMemory {
    pub fn uniform(capacity: usize) -> Self {
        Self {
            capacity,
            items: Vec::new(),
            next: 0,
            tree: None,
            alpha: 0.0,
            max_priority: 1.0,
        }
    }

    pub fn prioritized(capacity: usize, alpha: f64) -> Self {
        Self {
            tree: Some(SumTree::new(capacity)),
            alpha,
            ..Self::uniform(capacity)
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn is_prioritized(&self) -> bool {
        self.tree.is_some()
    }

    pub fn get(&self, i: usize) -> &Experience {
        &self.items[i]
    }

    /// Stores `exp`, evicting the oldest entry when full. New entries get the
    /// largest priority seen so far.
    pub fn push(&mut self, exp: Experience) -> usize {
        let slot = if self.items.len() < self.capacity {
            self.items.push(exp);
            self.items.len() - 1
        } else {
            let slot = self.next;
            self.items[slot] = exp;
            slot
        };
        self.next = (slot + 1) % self.capacity;
        let p = self.max_priority.powf(self.alpha);
        if let Some(tree) = self.tree.as_mut() {
            tree.set(slot, p);
        }
        slot
    }

    pub fn set_priority(&mut self, i: usize, priority: f64) {
        self.max_priority = self.max_priority.max(priority);
        let alpha = self.alpha;
        if let Some(tree) = self.tree.as_mut() {
            tree.set(i, priority.powf(alpha));
        }
    }

    /// Probability of drawing entry `i`.
    pub fn probability(&self, i: usize) -> f64 {
        match &self.tree {
            Some(tree) => tree.get(i) / tree.total(),
            None => 1.0 / self.items.len() as f64,
        }
    }

    /// Draws `batch` indices with replacement, proportionally to
    /// `priority^α` (uniformly when not prioritized), with importance
    /// weights normalized by the batch maximum.
    pub fn sample(&self, batch: usize, beta: f64, rng: &mut impl Rng) -> Sample {
        let n = self.items.len();
        let indices: Vec<usize> = match &self.tree {
            Some(tree) => (0..batch)
                .map(|_| {
                    let u = rng.gen::<f64>() * tree.total();
                    tree.find(u).min(n - 1)
                })
                .collect(),
            None => (0..batch).map(|_| rng.gen_range(0..n)).collect(),
        };
        let weights = if self.tree.is_some() {
            let probs: Vec<f64> = indices.iter().map(|&i| self.probability(i)).collect();
            importance_weights(&probs, n, beta)
        } else {
            vec![1.0; batch]
        };
        Sample { indices, weights }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::ObservationVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn exp(r: f64) -> Experience {
        Experience {
            observation: ObservationVector(vec![r]),
            action: 0,
            reward: r,
            next_observation: ObservationVector(vec![r]),
            done: false,
        }
    }

    #[test]
    fn ring_evicts_oldest() {
        let mut m = ReplayMemory::uniform(3);
        for r in 0..5 {
            m.push(exp(r as f64));
            assert!(m.len() <= 3);
        }
        let rewards: Vec<f64> = (0..3).map(|i| m.get(i).reward).collect();
        assert_eq!(rewards, vec![3.0, 4.0, 2.0]);
    }

    #[test]
    fn sum_tree_find() {
        let mut t = SumTree::new(3);
        t.set(0, 1.0);
        t.set(1, 2.0);
        t.set(2, 3.0);
        assert_eq!(t.total(), 6.0);
        assert_eq!(t.find(0.5), 0);
        assert_eq!(t.find(1.0), 1);
        assert_eq!(t.find(2.9), 1);
        assert_eq!(t.find(3.0), 2);
        assert_eq!(t.find(5.999), 2);
    }

    #[test]
    fn proportional_frequency() {
        let mut m = ReplayMemory::prioritized(2, 1.0);
        m.push(exp(0.0));
        m.push(exp(1.0));
        m.set_priority(0, 3.0);
        m.set_priority(1, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = m.sample(10_000, 0.4, &mut rng);
        let f = s.indices.iter().filter(|&&i| i == 0).count() as f64 / 10_000.0;
        assert!((f - 0.75).abs() < 0.02, "{f}");
    }

    #[test]
    fn weights_formula() {
        let w = importance_weights(&[0.75, 0.25], 2, 1.0);
        assert!((w[0] - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(w[1], 1.0);
    }

    #[test]
    fn equal_priorities_give_unit_weights() {
        let mut m = ReplayMemory::prioritized(4, 0.6);
        for r in 0..4 {
            m.push(exp(r as f64));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = m.sample(64, 0.7, &mut rng);
        assert!(s.weights.iter().all(|&w| (w - 1.0).abs() < 1e-12));
    }

    #[test]
    fn new_entries_get_max_priority() {
        let mut m = ReplayMemory::prioritized(4, 1.0);
        m.push(exp(0.0));
        m.set_priority(0, 5.0);
        m.push(exp(1.0));
        assert_eq!(m.probability(1), 0.5);
    }
}
