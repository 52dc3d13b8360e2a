//! Edge model shared by every structure in the crate: vertex and edge
//! identifiers, exact integer weights, the lexicographic tie-broken weight
//! key that makes minimum spanning forests unique, and the stream
//! normalization step that assigns arrival positions.

use std::fmt;

/// Dense vertex index in `[0, n)`. The vertex count is fixed when a
/// structure is constructed; operations reject indices `>= n`.
pub type VertexId = u32;

/// Exact edge weight. Comparisons are integer-exact so spanning forest
/// logic never sees rounding.
pub type Weight = i64;

/// Identity of an inserted edge. Ids are never reused; two insertions of
/// the same endpoint pair get distinct ids.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct EdgeId(pub u64);

impl fmt::Debug for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Total order on edges: weight first, edge identity as tie break.
/// Distinct edges always compare unequal, so "a minimum spanning forest"
/// becomes "the minimum spanning forest" and set equality tests are exact.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct WeightKey {
    pub weight: Weight,
    pub edge: EdgeId,
}

impl WeightKey {
    pub fn new(weight: Weight, edge: EdgeId) -> Self {
        WeightKey { weight, edge }
    }
}

/// An edge as it arrived on the stream: endpoints, its user-facing weight,
/// the arrival position `toa`, and its stable identity.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct StreamEdge {
    pub u: VertexId,
    pub v: VertexId,
    pub weight: Weight,
    pub toa: u64,
    pub id: EdgeId,
}

impl StreamEdge {
    /// Key ordering edges by true weight, tie-broken by identity.
    pub fn weight_key(&self) -> WeightKey {
        WeightKey::new(self.weight, self.id)
    }

    /// Key for sliding-window structures: weight is the negated arrival
    /// position, so older edges are heavier. A heaviest-edge query on a
    /// path then finds the oldest edge on it.
    pub fn window_key(&self) -> WeightKey {
        WeightKey::new(-(self.toa as i64), self.id)
    }

    pub fn keyed_by_weight(&self) -> KeyedEdge {
        KeyedEdge { u: self.u, v: self.v, key: self.weight_key(), id: self.id }
    }

    pub fn keyed_by_recency(&self) -> KeyedEdge {
        KeyedEdge { u: self.u, v: self.v, key: self.window_key(), id: self.id }
    }
}

/// An edge with its comparison key resolved, ready for forest maintenance.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct KeyedEdge {
    pub u: VertexId,
    pub v: VertexId,
    pub key: WeightKey,
    pub id: EdgeId,
}

/// Raw `(u, v, w)` triple as supplied by callers and the CLI.
pub type RawEdge = (VertexId, VertexId, Weight);

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GraphError {
    /// An endpoint was `>= n`; carries the index of the offending edge
    /// within the submitted batch.
    VertexOutOfRange { index: usize, vertex: VertexId, n: usize },
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::VertexOutOfRange { index, vertex, n } => {
                write!(f, "edge {index}: vertex {vertex} out of range (n = {n})")
            }
        }
    }
}

impl std::error::Error for GraphError {}

/// Checks every endpoint of a batch against the vertex bound. The whole
/// batch is rejected if any edge is out of range; nothing is consumed.
pub fn validate_batch(n: usize, batch: &[RawEdge]) -> Result<(), GraphError> {
    for (index, &(u, v, _)) in batch.iter().enumerate() {
        if u as usize >= n {
            return Err(GraphError::VertexOutOfRange { index, vertex: u, n });
        }
        if v as usize >= n {
            return Err(GraphError::VertexOutOfRange { index, vertex: v, n });
        }
    }
    Ok(())
}

/// Turns a raw batch into stream edges. Every input position consumes one
/// arrival slot starting at `base` (so expiration counts line up with what
/// the caller submitted), but self-loops are dropped from the output.
/// Parallel edges are all retained with distinct ids. The assigned id
/// equals the arrival position.
pub fn normalize_batch(
    n: usize,
    batch: &[RawEdge],
    base: u64,
) -> Result<Vec<StreamEdge>, GraphError> {
    validate_batch(n, batch)?;
    let mut out = Vec::with_capacity(batch.len());
    for (i, &(u, v, w)) in batch.iter().enumerate() {
        if u == v {
            continue;
        }
        let slot = base + i as u64;
        out.push(StreamEdge { u, v, weight: w, toa: slot, id: EdgeId(slot) });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn window_key_reverses_age() {
        let old = StreamEdge { u: 0, v: 1, weight: 7, toa: 5, id: EdgeId(5) };
        let new = StreamEdge { u: 1, v: 2, weight: 7, toa: 9, id: EdgeId(9) };
        assert!(old.window_key() > new.window_key());
    }

    #[test]
    fn window_key_orders_descending_by_arrival() {
        let edges: Vec<_> = [1u64, 2, 3]
            .iter()
            .map(|&t| StreamEdge { u: 0, v: 1, weight: 0, toa: t, id: EdgeId(t) })
            .collect();
        let mut keys: Vec<_> = edges.iter().map(|e| e.window_key()).collect();
        keys.sort();
        keys.reverse();
        let toas: Vec<u64> = keys.iter().map(|k| (-k.weight) as u64).collect();
        assert_eq!(toas, vec![1, 2, 3]);
    }

    #[test]
    fn normalize_drops_self_loops_but_consumes_slots() {
        let out = normalize_batch(4, &[(1, 1, 5)], 10).unwrap();
        assert!(out.is_empty());
        let out = normalize_batch(4, &[(1, 1, 5), (0, 1, 2)], 10).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].toa, 11);
    }

    #[test]
    fn normalize_keeps_parallel_edges_distinct() {
        let out = normalize_batch(4, &[(0, 1, 5), (0, 1, 5)], 3).unwrap();
        assert_eq!(out.len(), 2);
        assert_ne!(out[0].id, out[1].id);
        assert_eq!((out[0].toa, out[1].toa), (3, 4));
    }

    #[test]
    fn normalize_rejects_out_of_range_with_index() {
        let err = normalize_batch(4, &[(0, 7, 1)], 0).unwrap_err();
        assert_eq!(err, GraphError::VertexOutOfRange { index: 0, vertex: 7, n: 4 });
    }

    proptest! {
        #[test]
        fn weight_key_is_a_strict_total_order(
            raw in proptest::collection::vec((any::<i32>(), 0u64..1000), 2..40)
        ) {
            // Distinct ids guarantee distinct keys even with equal weights.
            let mut keys: Vec<WeightKey> = raw
                .iter()
                .enumerate()
                .map(|(i, &(w, _))| WeightKey::new(w as i64, EdgeId(i as u64)))
                .collect();
            keys.sort();
            for pair in keys.windows(2) {
                prop_assert!(pair[0] < pair[1]);
            }
        }

        #[test]
        fn window_key_is_order_reversing_in_toa(a in 0u64..1_000_000, b in 0u64..1_000_000) {
            prop_assume!(a != b);
            let ea = StreamEdge { u: 0, v: 1, weight: 0, toa: a, id: EdgeId(a) };
            let eb = StreamEdge { u: 0, v: 1, weight: 0, toa: b, id: EdgeId(b) };
            if a < b {
                prop_assert!(ea.window_key() > eb.window_key());
            } else {
                prop_assert!(ea.window_key() < eb.window_key());
            }
        }

        #[test]
        fn normalize_length_is_input_minus_self_loops(
            batch in proptest::collection::vec((0u32..6, 0u32..6, -5i64..5), 0..30)
        ) {
            let loops = batch.iter().filter(|(u, v, _)| u == v).count();
            let out = normalize_batch(6, &batch, 0).unwrap();
            prop_assert_eq!(out.len(), batch.len() - loops);
            for pair in out.windows(2) {
                prop_assert!(pair[0].toa < pair[1].toa);
            }
        }
    }
}
