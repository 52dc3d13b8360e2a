//! Sliding-window connectivity, lazy and eager.

use std::collections::BTreeMap;

use crate::graph::{EdgeId, GraphError, RawEdge, VertexId};
use crate::msf::InsertOutcome;

use super::{check_batch, SlotClock, WindowMsf};

/// Lazy sliding-window connectivity: expiry is a single counter bump, the
/// forest keeps expired edges, and queries apply the recent-edge rule.
pub struct SwConn {
    core: WindowMsf,
    n: usize,
}

impl SwConn {
    pub fn new(n: usize, seed: u64) -> Self {
        SwConn { core: WindowMsf::new(n, seed), n }
    }

    pub fn insert(&mut self, batch: &[RawEdge]) -> Result<(), GraphError> {
        check_batch(self.n, batch)?;
        self.core.insert_filtered(batch, |_| true);
        Ok(())
    }

    pub(crate) fn insert_filtered(
        &mut self,
        batch: &[RawEdge],
        keep: impl FnMut(usize) -> bool,
    ) {
        self.core.insert_filtered(batch, keep);
    }

    /// Drops the `delta` oldest unexpired arrival positions.
    pub fn expire(&mut self, delta: u64) {
        self.core.clock.expire(delta);
    }

    pub fn is_connected(&self, u: VertexId, v: VertexId) -> bool {
        self.core.is_connected_lazy(u, v)
    }

    pub fn window_start(&self) -> u64 {
        self.core.clock.window_start()
    }

    pub fn arrivals(&self) -> u64 {
        self.core.clock.next_slot()
    }
}

/// Eager variant: additionally keeps the unexpired forest members ordered
/// by arrival, deletes them from the forest when they expire, and can
/// report the number of connected components in constant time.
pub struct SwConnEager {
    core: WindowMsf,
    members: BTreeMap<u64, EdgeId>,
    n: usize,
}

impl SwConnEager {
    pub fn new(n: usize, seed: u64) -> Self {
        SwConnEager { core: WindowMsf::new(n, seed), members: BTreeMap::new(), n }
    }

    pub fn insert(&mut self, batch: &[RawEdge]) -> Result<(), GraphError> {
        check_batch(self.n, batch)?;
        self.insert_filtered(batch, |_| true);
        Ok(())
    }

    pub(crate) fn insert_filtered(
        &mut self,
        batch: &[RawEdge],
        keep: impl FnMut(usize) -> bool,
    ) -> InsertOutcome {
        let outcome = self.core.insert_filtered(batch, keep);
        for id in &outcome.added {
            self.members.insert(id.0, *id);
        }
        for id in &outcome.evicted {
            self.members.remove(&id.0).expect("evicted edge tracked");
        }
        outcome
    }

    /// Expires the `delta` oldest positions and removes the affected
    /// forest edges right away, so the forest holds exactly the window's
    /// spanning forest afterwards.
    pub fn expire(&mut self, delta: u64) {
        self.core.clock.expire(delta);
        let start = self.core.clock.window_start();
        let kept = self.members.split_off(&start);
        let expired = std::mem::replace(&mut self.members, kept);
        let ids: Vec<EdgeId> = expired.into_values().collect();
        self.core.msf.batch_delete(&ids).expect("expired edges are members");
    }

    pub fn is_connected(&self, u: VertexId, v: VertexId) -> bool {
        debug_assert_eq!(
            self.core.msf.connected(u, v) || u == v,
            self.core.is_connected_lazy(u, v),
            "eager forest diverged from recent-edge rule"
        );
        u == v || self.core.msf.connected(u, v)
    }

    pub fn num_components(&self) -> usize {
        self.n - self.members.len()
    }

    pub fn forest_size(&self) -> usize {
        self.members.len()
    }

    pub fn window_start(&self) -> u64 {
        self.core.clock.window_start()
    }

    pub fn arrivals(&self) -> u64 {
        self.core.clock.next_slot()
    }

    #[cfg(test)]
    pub(crate) fn rc_validate(&self) -> Result<(), String> {
        self.core.msf.rc().validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{self, WindowSnapshot};
    use crate::graph::{normalize_batch, StreamEdge};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Mirror of a structure's op stream, replayed into a snapshot.
    struct Mirror {
        n: usize,
        clock: SlotClock,
        edges: Vec<StreamEdge>,
    }

    impl Mirror {
        fn new(n: usize) -> Self {
            Mirror { n, clock: SlotClock::default(), edges: Vec::new() }
        }

        fn insert(&mut self, batch: &[RawEdge]) {
            let base = self.clock.take_slots(batch.len());
            self.edges.extend(normalize_batch(self.n, batch, base).unwrap());
        }

        fn expire(&mut self, delta: u64) {
            self.clock.expire(delta);
        }

        fn snapshot(&self) -> WindowSnapshot {
            let start = self.clock.window_start();
            WindowSnapshot::new(
                self.n,
                self.edges.iter().filter(|e| e.toa >= start).copied().collect(),
            )
        }
    }

    #[test]
    fn expired_edge_disconnects_lazily() {
        let mut c = SwConn::new(3, 1);
        c.insert(&[(0, 1, 1)]).unwrap();
        assert!(c.is_connected(0, 1));
        c.expire(1);
        assert!(!c.is_connected(0, 1));
        assert!(c.is_connected(0, 0));
    }

    #[test]
    fn transitive_connectivity() {
        let mut c = SwConn::new(3, 1);
        c.insert(&[(0, 1, 1), (1, 2, 1)]).unwrap();
        assert!(c.is_connected(0, 2));
    }

    #[test]
    fn eager_component_counting_basics() {
        let mut c = SwConnEager::new(4, 9);
        assert_eq!(c.num_components(), 4);
        c.insert(&[(0, 1, 1), (1, 2, 1), (2, 3, 1)]).unwrap();
        assert_eq!(c.num_components(), 1);
        c.expire(3);
        assert_eq!(c.num_components(), 4);
    }

    #[test]
    fn expire_overshoot_empties_window() {
        let mut c = SwConnEager::new(3, 2);
        c.insert(&[(0, 1, 1)]).unwrap();
        c.expire(100);
        assert_eq!(c.num_components(), 3);
        // New edges still arrive after an overshoot.
        c.insert(&[(1, 2, 1)]).unwrap();
        assert!(c.is_connected(1, 2));
        assert!(!c.is_connected(0, 1));
    }

    #[test]
    fn expire_is_additive() {
        let mut a = SwConnEager::new(6, 3);
        let mut b = SwConnEager::new(6, 3);
        let batch: Vec<RawEdge> = (0..5).map(|i| (i, i + 1, 1)).collect();
        a.insert(&batch).unwrap();
        b.insert(&batch).unwrap();
        a.expire(2);
        a.expire(1);
        b.expire(3);
        for u in 0..6 {
            for v in 0..6 {
                assert_eq!(a.is_connected(u, v), b.is_connected(u, v));
            }
        }
        assert_eq!(a.num_components(), b.num_components());
    }

    #[test]
    fn self_loops_consume_arrival_positions() {
        let mut c = SwConnEager::new(3, 4);
        c.insert(&[(1, 1, 9), (0, 1, 1)]).unwrap();
        // Expiring one position kills only the dropped self loop.
        c.expire(1);
        assert!(c.is_connected(0, 1));
        c.expire(1);
        assert!(!c.is_connected(0, 1));
    }

    #[test]
    fn random_stream_against_window_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(555);
        for trial in 0..8 {
            let n = 40;
            let mut lazy = SwConn::new(n, trial);
            let mut eager = SwConnEager::new(n, trial + 100);
            let mut mirror = Mirror::new(n);
            for _ in 0..250 {
                if rng.gen_bool(0.65) {
                    let batch: Vec<RawEdge> = (0..rng.gen_range(1..=6))
                        .map(|_| {
                            (
                                rng.gen_range(0..n as u32),
                                rng.gen_range(0..n as u32),
                                rng.gen_range(1..=64),
                            )
                        })
                        .collect();
                    lazy.insert(&batch).unwrap();
                    eager.insert(&batch).unwrap();
                    mirror.insert(&batch);
                } else {
                    let delta = rng.gen_range(1..=10);
                    lazy.expire(delta);
                    eager.expire(delta);
                    mirror.expire(delta);
                }
                let snap = mirror.snapshot();
                let classes = oracle::connectivity_classes(&snap);
                assert_eq!(eager.num_components(), oracle::components_naive(&snap));
                for u in 0..n as u32 {
                    for v in (u + 1..n as u32).step_by(3) {
                        let want = classes[u as usize] == classes[v as usize];
                        assert_eq!(lazy.is_connected(u, v), want, "lazy {u} {v}");
                        assert_eq!(eager.is_connected(u, v), want, "eager {u} {v}");
                    }
                }
            }
            eager.rc_validate().unwrap();
        }
    }
}
