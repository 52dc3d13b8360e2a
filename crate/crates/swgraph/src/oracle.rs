//! Deliberately simple and slow reference implementations used by tests,
//! the CLI self check, and the fuzzer. Everything here recomputes from a
//! window snapshot and shares no code with the incremental structures it
//! checks (separate union-find, separate traversals).

use std::collections::BTreeSet;

use crate::graph::{EdgeId, StreamEdge, VertexId, Weight, WeightKey};

/// The multiset of unexpired stream edges plus the vertex count,
/// reconstructed from a logged operation stream rather than from any
/// structure under test.
#[derive(Clone, Debug, Default)]
pub struct WindowSnapshot {
    pub n: usize,
    pub edges: Vec<StreamEdge>,
}

impl WindowSnapshot {
    pub fn new(n: usize, edges: Vec<StreamEdge>) -> Self {
        WindowSnapshot { n, edges }
    }
}

/// Which key the reference Kruskal sorts by.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keying {
    TrueWeight,
    Recency,
}

fn key_of(e: &StreamEdge, keying: Keying) -> WeightKey {
    match keying {
        Keying::TrueWeight => e.weight_key(),
        Keying::Recency => e.window_key(),
    }
}

// Plain union-find with nothing clever about it. Kept private so the
// structures under test cannot share it.
struct NaiveDsu {
    parent: Vec<usize>,
}

impl NaiveDsu {
    fn new(n: usize) -> Self {
        NaiveDsu { parent: (0..n).collect() }
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// The unique minimum spanning forest of the snapshot under the chosen
/// keying, as a set of edge ids. Independent of input edge order.
pub fn kruskal_msf(snap: &WindowSnapshot, keying: Keying) -> BTreeSet<EdgeId> {
    let mut order: Vec<&StreamEdge> = snap.edges.iter().collect();
    order.sort_by_key(|e| key_of(e, keying));
    let mut dsu = NaiveDsu::new(snap.n);
    let mut chosen = BTreeSet::new();
    for e in order {
        if dsu.union(e.u as usize, e.v as usize) {
            chosen.insert(e.id);
        }
    }
    chosen
}

/// Sum of true weights over the unique minimum spanning forest.
pub fn msf_weight_exact(snap: &WindowSnapshot) -> Weight {
    let chosen = kruskal_msf(snap, Keying::TrueWeight);
    snap.edges.iter().filter(|e| chosen.contains(&e.id)).map(|e| e.weight).sum()
}

pub fn connected_naive(snap: &WindowSnapshot, u: VertexId, v: VertexId) -> bool {
    let mut dsu = NaiveDsu::new(snap.n);
    for e in &snap.edges {
        dsu.union(e.u as usize, e.v as usize);
    }
    dsu.find(u as usize) == dsu.find(v as usize)
}

pub fn components_naive(snap: &WindowSnapshot) -> usize {
    let mut dsu = NaiveDsu::new(snap.n);
    for e in &snap.edges {
        dsu.union(e.u as usize, e.v as usize);
    }
    (0..snap.n).filter(|&x| dsu.find(x) == x).count()
}

/// All-pairs connectivity as a flat matrix, for cheap bulk agreement checks.
pub fn connectivity_classes(snap: &WindowSnapshot) -> Vec<usize> {
    let mut dsu = NaiveDsu::new(snap.n);
    for e in &snap.edges {
        dsu.union(e.u as usize, e.v as usize);
    }
    (0..snap.n).map(|x| dsu.find(x)).collect()
}

/// BFS 2-coloring. Self-loops never appear in normalized snapshots.
pub fn bipartite_naive(snap: &WindowSnapshot) -> bool {
    let mut adj = vec![Vec::new(); snap.n];
    for e in &snap.edges {
        adj[e.u as usize].push(e.v as usize);
        adj[e.v as usize].push(e.u as usize);
    }
    let mut color = vec![u8::MAX; snap.n];
    let mut queue = Vec::new();
    for start in 0..snap.n {
        if color[start] != u8::MAX {
            continue;
        }
        color[start] = 0;
        queue.push(start);
        while let Some(x) = queue.pop() {
            for &y in &adj[x] {
                if color[y] == u8::MAX {
                    color[y] = 1 - color[x];
                    queue.push(y);
                } else if color[y] == color[x] {
                    return false;
                }
            }
        }
    }
    true
}

/// Whether the window graph contains a cycle (counting parallel edges).
pub fn has_cycle_naive(snap: &WindowSnapshot) -> bool {
    let mut dsu = NaiveDsu::new(snap.n);
    for e in &snap.edges {
        if !dsu.union(e.u as usize, e.v as usize) {
            return true;
        }
    }
    false
}

/// Heaviest edge on the unique `u`-`v` path of a forest given as keyed
/// edges, found by a depth-first walk. `None` if disconnected or `u == v`.
pub fn path_max_naive(
    n: usize,
    tree_edges: &[(VertexId, VertexId, WeightKey, EdgeId)],
    u: VertexId,
    v: VertexId,
) -> Option<(WeightKey, EdgeId)> {
    if u == v {
        return None;
    }
    let mut adj: Vec<Vec<(usize, WeightKey, EdgeId)>> = vec![Vec::new(); n];
    for &(a, b, key, id) in tree_edges {
        adj[a as usize].push((b as usize, key, id));
        adj[b as usize].push((a as usize, key, id));
    }
    // Iterative DFS carrying the running maximum from u.
    let mut best: Vec<Option<Option<(WeightKey, EdgeId)>>> = vec![None; n];
    best[u as usize] = Some(None);
    let mut stack = vec![u as usize];
    while let Some(x) = stack.pop() {
        let here = best[x].unwrap();
        for &(y, key, id) in &adj[x] {
            if best[y].is_none() {
                let max = match here {
                    Some((hk, _)) if hk > key => here,
                    _ => Some((key, id)),
                };
                best[y] = Some(max);
                stack.push(y);
            }
        }
    }
    best[v as usize].flatten()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimit(pub usize);

impl std::fmt::Display for OracleLimit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "snapshot too large for exhaustive oracle (limit n <= {})", self.0)
    }
}

impl std::error::Error for OracleLimit {}

/// Every proper cut of the snapshot, as `(membership bitmask, cut value)`.
/// Side `S` always contains vertex 0 so each cut appears once. Exhaustive,
/// so restricted to `n <= 12`.
pub fn cut_enumerate(snap: &WindowSnapshot) -> Result<Vec<(u32, u64)>, OracleLimit> {
    if snap.n > 12 {
        return Err(OracleLimit(12));
    }
    if snap.n < 2 {
        return Ok(Vec::new());
    }
    let m = snap.n as u32;
    let mut cuts = Vec::with_capacity(1 << (m - 1));
    // Enumerate subsets of {1..n-1}; S = subset | {0}.
    for rest in 0..(1u32 << (m - 1)) {
        let mask = (rest << 1) | 1;
        if mask == (1u32 << m) - 1 {
            continue; // improper: S = V
        }
        let mut value = 0u64;
        for e in &snap.edges {
            let a = (mask >> e.u) & 1;
            let b = (mask >> e.v) & 1;
            if a != b {
                value += 1;
            }
        }
        cuts.push((mask, value));
    }
    Ok(cuts)
}

/// Edge connectivity between `s` and `t` (max flow with unit capacities,
/// parallel edges counted), by repeated BFS augmentation.
pub fn maxflow_naive(snap: &WindowSnapshot, s: VertexId, t: VertexId) -> u64 {
    if s == t {
        return u64::MAX;
    }
    // Residual multigraph: each undirected edge becomes one unit of
    // capacity usable in either direction.
    let mut cap: Vec<Vec<(usize, i8)>> = vec![Vec::new(); snap.n]; // (edge slot, dir) per vertex
    let mut slots: Vec<(usize, usize, i8)> = Vec::new(); // (a, b, used: -1 backward, 0 free, 1 forward)
    for e in &snap.edges {
        let slot = slots.len();
        slots.push((e.u as usize, e.v as usize, 0));
        cap[e.u as usize].push((slot, 1));
        cap[e.v as usize].push((slot, -1));
    }
    let mut flow = 0;
    loop {
        // BFS over residual edges.
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; snap.n]; // (from vertex, slot)
        let mut seen = vec![false; snap.n];
        seen[s as usize] = true;
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(s as usize);
        'bfs: while let Some(x) = queue.pop_front() {
            for &(slot, dir) in &cap[x] {
                let (a, b, used) = slots[slot];
                let y = if x == a { b } else { a };
                // the residual allows traversal if this direction is unused
                let residual_ok = used == 0 || used == -dir;
                if residual_ok && !seen[y] {
                    seen[y] = true;
                    prev[y] = Some((x, slot));
                    if y == t as usize {
                        break 'bfs;
                    }
                    queue.push_back(y);
                }
            }
        }
        if !seen[t as usize] {
            return flow;
        }
        // Trace back and flip.
        let mut x = t as usize;
        while x != s as usize {
            let (from, slot) = prev[x].unwrap();
            let (a, _b, used) = slots[slot];
            let dir: i8 = if from == a { 1 } else { -1 };
            slots[slot].2 = if used == -dir { 0 } else { dir };
            x = from;
        }
        flow += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn se(u: VertexId, v: VertexId, w: Weight, t: u64) -> StreamEdge {
        StreamEdge { u, v, weight: w, toa: t, id: EdgeId(t) }
    }

    #[test]
    fn kruskal_on_triangle_drops_heaviest() {
        let snap = WindowSnapshot::new(3, vec![se(0, 1, 1, 0), se(1, 2, 2, 1), se(0, 2, 3, 2)]);
        let msf = kruskal_msf(&snap, Keying::TrueWeight);
        assert_eq!(msf, BTreeSet::from([EdgeId(0), EdgeId(1)]));
    }

    #[test]
    fn kruskal_is_input_order_independent() {
        let mut edges = vec![se(0, 1, 5, 0), se(1, 2, 5, 1), se(0, 2, 5, 2), se(2, 3, 1, 3)];
        let a = kruskal_msf(&WindowSnapshot::new(4, edges.clone()), Keying::TrueWeight);
        edges.reverse();
        let b = kruskal_msf(&WindowSnapshot::new(4, edges), Keying::TrueWeight);
        assert_eq!(a, b);
    }

    #[test]
    fn maxflow_counts_parallel_paths() {
        // k = 3 parallel two-edge paths from 0 to 4.
        let mut edges = Vec::new();
        for (i, mid) in [1u32, 2, 3].iter().enumerate() {
            edges.push(se(0, *mid, 1, 2 * i as u64));
            edges.push(se(*mid, 4, 1, 2 * i as u64 + 1));
        }
        let snap = WindowSnapshot::new(5, edges);
        assert_eq!(maxflow_naive(&snap, 0, 4), 3);
        assert_eq!(maxflow_naive(&snap, 1, 2), 2);
    }

    #[test]
    fn cut_enumerate_on_k3_gives_two_everywhere() {
        let snap = WindowSnapshot::new(3, vec![se(0, 1, 1, 0), se(1, 2, 1, 1), se(0, 2, 1, 2)]);
        let cuts = cut_enumerate(&snap).unwrap();
        assert_eq!(cuts.len(), 3);
        assert!(cuts.iter().all(|&(_, v)| v == 2));
    }

    #[test]
    fn path_max_walks_the_unique_path() {
        let k = |w: i64, id: u64| (WeightKey::new(w, EdgeId(id)), EdgeId(id));
        let tree = vec![
            (0, 1, WeightKey::new(3, EdgeId(0)), EdgeId(0)),
            (1, 2, WeightKey::new(9, EdgeId(1)), EdgeId(1)),
            (2, 3, WeightKey::new(2, EdgeId(2)), EdgeId(2)),
        ];
        assert_eq!(path_max_naive(4, &tree, 0, 3), Some(k(9, 1).0).map(|key| (key, key.edge)));
        assert_eq!(path_max_naive(4, &tree, 0, 0), None);
        assert_eq!(path_max_naive(5, &tree, 0, 4), None);
    }

    #[test]
    fn bipartite_and_cycles() {
        let c4 = WindowSnapshot::new(
            4,
            vec![se(0, 1, 1, 0), se(1, 2, 1, 1), se(2, 3, 1, 2), se(3, 0, 1, 3)],
        );
        assert!(bipartite_naive(&c4));
        assert!(has_cycle_naive(&c4));
        let c3 = WindowSnapshot::new(3, vec![se(0, 1, 1, 0), se(1, 2, 1, 1), se(2, 0, 1, 2)]);
        assert!(!bipartite_naive(&c3));
        let path = WindowSnapshot::new(3, vec![se(0, 1, 1, 0), se(1, 2, 1, 1)]);
        assert!(bipartite_naive(&path));
        assert!(!has_cycle_naive(&path));
    }
}
