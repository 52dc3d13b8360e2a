//! Approximate minimum spanning forest weight on a sliding window.
//!
//! One eager connectivity structure per geometric weight class: level `i`
//! sees the window edges of weight at most `(1 + eps)^i`. The forest
//! weight estimate is then a telescoped sum of component counts, and it
//! sandwiches the exact weight within a `(1 + eps)` factor as long as all
//! weights lie in the configured range.

use crate::graph::{GraphError, RawEdge, Weight};

use super::{check_batch, SwConnEager};

pub struct SwApproxMsf {
    levels: Vec<SwConnEager>,
    thresholds: Vec<f64>,
    epsilon: f64,
    max_weight: Weight,
    n: usize,
}

impl SwApproxMsf {
    /// `epsilon > 0`; accepted edge weights lie in `[1, max_weight]`.
    pub fn new(n: usize, seed: u64, epsilon: f64, max_weight: Weight) -> Self {
        assert!(epsilon > 0.0, "epsilon must be positive");
        assert!(max_weight >= 1, "max weight must be at least 1");
        let mut thresholds = Vec::new();
        let mut i = 0;
        loop {
            let t = (1.0 + epsilon).powi(i);
            thresholds.push(t);
            if t >= max_weight as f64 {
                break;
            }
            i += 1;
        }
        let levels = (0..thresholds.len())
            .map(|i| SwConnEager::new(n, crate::mix::mix3(seed, i as u64, 0x5eed)))
            .collect();
        SwApproxMsf { levels, thresholds, epsilon, max_weight, n }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    /// Inserts a batch; returns the indices of edges rejected for carrying
    /// an out-of-range weight. Rejected edges still consume their arrival
    /// positions, so expiry bookkeeping matches the submitted stream.
    pub fn insert(&mut self, batch: &[RawEdge]) -> Result<Vec<usize>, GraphError> {
        check_batch(self.n, batch)?;
        let rejected: Vec<usize> = batch
            .iter()
            .enumerate()
            .filter(|(_, &(_, _, w))| w < 1 || w > self.max_weight)
            .map(|(i, _)| i)
            .collect();
        let mut flag = vec![false; batch.len()];
        for &i in &rejected {
            flag[i] = true;
        }
        for (lvl, structure) in self.levels.iter_mut().enumerate() {
            let cutoff = self.thresholds[lvl];
            structure
                .insert_filtered(batch, |i| !flag[i] && (batch[i].2 as f64) <= cutoff);
        }
        Ok(rejected)
    }

    pub fn expire(&mut self, delta: u64) {
        for structure in &mut self.levels {
            structure.expire(delta);
        }
    }

    /// `(1 + eps)`-approximate window forest weight from component counts.
    pub fn weight(&self) -> f64 {
        let cc: Vec<usize> = self.levels.iter().map(|l| l.num_components()).collect();
        let mut estimate = (self.n - cc[0]) as f64;
        for i in 1..cc.len() {
            estimate += (cc[i - 1] as f64 - cc[i] as f64) * self.thresholds[i];
        }
        estimate
    }
}
