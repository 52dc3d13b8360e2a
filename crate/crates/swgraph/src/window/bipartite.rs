//! Sliding-window bipartiteness via the cycle double cover: the graph is
//! bipartite exactly when doubling every vertex and crossing every edge
//! doubles the component count.

use crate::graph::{GraphError, RawEdge};

use super::{check_batch, SwConnEager};

pub struct SwBipartite {
    graph: SwConnEager,
    cover: SwConnEager,
    n: usize,
}

impl SwBipartite {
    pub fn new(n: usize, seed: u64) -> Self {
        SwBipartite {
            graph: SwConnEager::new(n, crate::mix::mix3(seed, 1, 0)),
            cover: SwConnEager::new(2 * n, crate::mix::mix3(seed, 2, 0)),
            n,
        }
    }

    pub fn insert(&mut self, batch: &[RawEdge]) -> Result<(), GraphError> {
        check_batch(self.n, batch)?;
        // Each user edge occupies two cover positions, so expiry stays a
        // plain doubling. Self loops stay self loops and get dropped on
        // both sides while still consuming their positions.
        let mut cover_batch = Vec::with_capacity(batch.len() * 2);
        for &(u, v, w) in batch {
            if u == v {
                cover_batch.push((u, v, w));
                cover_batch.push((u, v, w));
            } else {
                cover_batch.push((u, v + self.n as u32, w));
                cover_batch.push((u + self.n as u32, v, w));
            }
        }
        self.graph.insert_filtered(batch, |_| true);
        self.cover.insert_filtered(&cover_batch, |_| true);
        Ok(())
    }

    pub fn expire(&mut self, delta: u64) {
        self.graph.expire(delta);
        self.cover.expire(delta.saturating_mul(2));
    }

    pub fn is_bipartite(&self) -> bool {
        self.cover.num_components() == 2 * self.graph.num_components()
    }
}
