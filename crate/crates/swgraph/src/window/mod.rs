//! Batch sliding-window graph structures.
//!
//! Every structure here consumes the same operation vocabulary: `insert`
//! takes a batch of raw `(u, v, w)` edges on the new side of the window,
//! `expire` drops the oldest `delta` arrival positions from the old side,
//! and the structure answers its own queries in between. All of them ride
//! on the batch-incremental forest with recency keys (older edges are
//! heavier), so a heaviest-edge query finds the oldest edge on a path.

mod amsf;
mod bipartite;
mod conn;
mod cyclefree;
mod kcert;
mod sparsifier;

pub use amsf::SwApproxMsf;
pub use bipartite::SwBipartite;
pub use conn::{SwConn, SwConnEager};
pub use cyclefree::SwCycleFree;
pub use kcert::SwCertificate;
pub use sparsifier::{SparseEdge, SparsifierConfig, SwSparsifier};

use crate::graph::{EdgeId, GraphError, RawEdge, StreamEdge};
use crate::msf::{InsertOutcome, MsForest};

/// Arrival bookkeeping: the next free arrival position and the position of
/// the oldest unexpired edge. Every submitted batch entry consumes one
/// position whether or not it survives normalization, so expiry counts
/// always line up with what the caller streamed in.
#[derive(Clone, Copy, Debug, Default)]
pub struct SlotClock {
    next: u64,
    t_w: u64,
}

impl SlotClock {
    pub fn take_slots(&mut self, count: usize) -> u64 {
        let base = self.next;
        self.next += count as u64;
        base
    }

    /// Advances the window start past `delta` arrival positions, clamping
    /// at the newest position when the window empties.
    pub fn expire(&mut self, delta: u64) {
        self.t_w = self.t_w.saturating_add(delta).min(self.next);
    }

    /// Arrival position of the oldest unexpired slot.
    pub fn window_start(&self) -> u64 {
        self.t_w
    }

    pub fn next_slot(&self) -> u64 {
        self.next
    }
}

/// Forest plus clock: the common core of the window structures.
pub(crate) struct WindowMsf {
    pub msf: MsForest,
    pub clock: SlotClock,
}

impl WindowMsf {
    pub fn new(n: usize, seed: u64) -> Self {
        WindowMsf { msf: MsForest::new(n, seed), clock: SlotClock::default() }
    }

    /// Consumes one arrival slot per batch entry and inserts the entries
    /// that are not self loops and pass `keep`. Endpoints must already be
    /// validated.
    pub fn insert_filtered(
        &mut self,
        batch: &[RawEdge],
        mut keep: impl FnMut(usize) -> bool,
    ) -> InsertOutcome {
        let base = self.clock.take_slots(batch.len());
        let stream: Vec<StreamEdge> = batch
            .iter()
            .enumerate()
            .filter(|(i, (u, v, _))| u != v && keep(*i))
            .map(|(i, &(u, v, w))| {
                let slot = base + i as u64;
                StreamEdge { u, v, weight: w, toa: slot, id: EdgeId(slot) }
            })
            .collect();
        self.msf.insert_batch_by_recency(&stream)
    }

    /// The recent-edge rule: connected in the window iff connected in the
    /// forest and the oldest edge on the path is still unexpired.
    pub fn is_connected_lazy(&self, u: u32, v: u32) -> bool {
        if u == v {
            return true;
        }
        match self.msf.heaviest_on_path(u, v) {
            None => false,
            Some((key, _)) => (-key.weight) as u64 >= self.clock.window_start(),
        }
    }
}

pub(crate) fn check_batch(n: usize, batch: &[RawEdge]) -> Result<(), GraphError> {
    crate::graph::validate_batch(n, batch)
}
