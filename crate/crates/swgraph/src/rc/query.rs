//! Read-side operations: path maximum queries, connectivity, cluster
//! inspection, and the transient marking used by path compression.

use arrayvec::ArrayVec;

use crate::graph::{EdgeId, VertexId, WeightKey};
use crate::mix;

use super::cluster::{pathmax_merge, ClusterId, ClusterKind, PathMax};
use super::{RcError, RcForest, Site};

/// Partial path maxima from a fixed inner vertex to each boundary vertex of
/// the cluster currently being walked.
#[derive(Clone, Debug, Default)]
struct BoundState {
    entries: ArrayVec<(Site, PathMax), 2>,
}

impl BoundState {
    fn get(&self, b: Site) -> PathMax {
        self.entries
            .iter()
            .find(|(s, _)| *s == b)
            .map(|(_, m)| *m)
            .expect("boundary missing from walk state")
    }

    fn has(&self, b: Site) -> bool {
        self.entries.iter().any(|(s, _)| *s == b)
    }
}

impl RcForest {
    /// Heaviest real edge on the tree path from `u` to `v`. `None` when the
    /// vertices are disconnected or equal.
    pub fn path_max(&self, u: VertexId, v: VertexId) -> Option<(WeightKey, EdgeId)> {
        assert!((u as usize) < self.n() && (v as usize) < self.n(), "vertex out of range");
        if u == v {
            return None;
        }
        let su = self.primary_site(u);
        let sv = self.primary_site(v);
        let chain_u = self.ancestor_chain(su);
        let chain_v = self.ancestor_chain(sv);
        if chain_u.last() != chain_v.last() {
            return None;
        }
        // Lowest common cluster of the two leaf-to-root chains. The chains
        // share a suffix, so the first hit from the leaf side is the meet.
        let set: std::collections::HashSet<ClusterId> = chain_u.iter().copied().collect();
        let mut z = *chain_v.last().unwrap();
        let mut iz_v = chain_v.len() - 1;
        for (i, c) in chain_v.iter().enumerate() {
            if set.contains(c) {
                z = *c;
                iz_v = i;
                break;
            }
        }
        let iz_u = chain_u.iter().position(|c| *c == z).unwrap();
        debug_assert!(iz_u >= 1 && iz_v >= 1);
        let zrep = self.clusters.get(z).rep;

        let u_is_rep = iz_u == 1;
        let v_is_rep = iz_v == 1;
        debug_assert!(!u_is_rep || zrep == su);
        debug_assert!(!v_is_rep || zrep == sv);
        debug_assert!(!(u_is_rep && v_is_rep));

        if u_is_rep {
            return self.walk_state(&chain_v, iz_v).get(su);
        }
        if v_is_rep {
            return self.walk_state(&chain_u, iz_u).get(sv);
        }
        let state_u = self.walk_state(&chain_u, iz_u);
        let state_v = self.walk_state(&chain_v, iz_v);
        pathmax_merge(state_u.get(zrep), state_v.get(zrep))
    }

    /// Whether `u` and `v` currently share a root cluster.
    pub fn connected(&self, u: VertexId, v: VertexId) -> bool {
        assert!((u as usize) < self.n() && (v as usize) < self.n(), "vertex out of range");
        if u == v {
            return true;
        }
        self.root_of_site(self.primary_site(u)) == self.root_of_site(self.primary_site(v))
    }

    fn ancestor_chain(&self, s: Site) -> Vec<ClusterId> {
        let mut chain = vec![self.sites[s as usize].leaf];
        while let Some(p) = self.clusters.get(*chain.last().unwrap()).parent {
            chain.push(p);
        }
        chain
    }

    /// State after ascending from the site's own cluster (`chain[1]`) up to
    /// `chain[stop - 1]` inclusive.
    fn walk_state(&self, chain: &[ClusterId], stop: usize) -> BoundState {
        let site = self.clusters.get(chain[1]).rep;
        let mut state = BoundState::default();
        let first = self.clusters.get(chain[1]);
        for b in first.boundary() {
            let pm = self.child_path(chain[1], site, b);
            state.entries.push((b, pm));
        }
        for &p in &chain[2..stop] {
            let node = self.clusters.get(p);
            let w = node.rep;
            let mut next = BoundState::default();
            for b in node.boundary() {
                let m = if state.has(b) {
                    state.get(b)
                } else {
                    pathmax_merge(state.get(w), self.child_path(p, w, b))
                };
                next.entries.push((b, m));
            }
            state = next;
        }
        state
    }

    /// Path maximum of the unique path-shaped child of `parent` whose
    /// boundary is exactly `{a, b}`.
    fn child_path(&self, parent: ClusterId, a: Site, b: Site) -> PathMax {
        for &k in &self.clusters.get(parent).kids {
            let kid = self.clusters.get(k);
            if kid.is_path_shaped() {
                let bd = kid.boundary();
                if (bd[0] == a && bd[1] == b) || (bd[0] == b && bd[1] == a) {
                    return kid.path_max();
                }
            }
        }
        panic!("no path child with boundary ({a}, {b})");
    }

    // ---- marking ------------------------------------------------------

    /// Flags every cluster containing one of the given vertices, by walking
    /// up from each leaf. Idempotent per cluster; `unmark` undoes exactly
    /// this call.
    pub fn mark(&mut self, vs: &[VertexId]) {
        assert!(self.mark_trail.is_empty(), "mark while already marked");
        let mut sorted: Vec<VertexId> = vs.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        for v in sorted {
            assert!((v as usize) < self.n(), "vertex out of range");
            let s = self.primary_site(v);
            self.marked_sites.insert(s);
            let mut c = self.sites[s as usize].leaf;
            loop {
                let node = self.clusters.get_mut(c);
                if node.marked {
                    break;
                }
                node.marked = true;
                self.mark_trail.push(c);
                match node.parent {
                    Some(p) => c = p,
                    None => break,
                }
            }
        }
    }

    /// Clears the flags set by the last `mark`.
    pub fn unmark(&mut self) {
        for c in std::mem::take(&mut self.mark_trail) {
            self.clusters.get_mut(c).marked = false;
        }
        self.marked_sites.clear();
    }

    pub(crate) fn site_marked(&self, s: Site) -> bool {
        self.marked_sites.contains(&s)
    }

    // ---- cluster inspection --------------------------------------------

    pub fn cluster(&self, id: ClusterId) -> ClusterRef<'_> {
        ClusterRef { f: self, id }
    }

    pub fn root_of_vertex(&self, v: VertexId) -> ClusterRef<'_> {
        assert!((v as usize) < self.n(), "vertex out of range");
        self.cluster(self.root_of_site(self.primary_site(v)))
    }

    pub fn leaf_of_vertex(&self, v: VertexId) -> ClusterRef<'_> {
        assert!((v as usize) < self.n(), "vertex out of range");
        self.cluster(self.sites[self.primary_site(v) as usize].leaf)
    }

    /// Root clusters in deterministic (id) order; one per component.
    pub fn roots(&self) -> impl Iterator<Item = ClusterRef<'_>> {
        self.roots.iter().map(move |&id| self.cluster(id))
    }

    /// Original vertex a site stands for (dummy sites map to their owner).
    pub fn site_owner(&self, s: Site) -> VertexId {
        self.sites[s as usize].owner
    }

    pub fn is_dummy_site(&self, s: Site) -> bool {
        (s as usize) >= self.n() || self.sites[s as usize].owner != s
    }

    /// Depth of the deepest leaf under any root.
    pub fn height(&self) -> usize {
        let mut best = 0;
        let mut stack: Vec<(ClusterId, usize)> =
            self.roots.iter().map(|&r| (r, 0usize)).collect();
        while let Some((c, d)) = stack.pop() {
            best = best.max(d);
            for &k in &self.clusters.get(c).kids {
                stack.push((k, d + 1));
            }
        }
        best
    }

    /// Canonical structural hash: identical seed and operation sequence
    /// must produce identical digests.
    pub fn structure_digest(&self) -> u64 {
        let mut acc = 0xabcd_ef01_2345_6789u64;
        let mut roots: Vec<ClusterId> = self.roots.iter().copied().collect();
        roots.sort_unstable();
        for r in roots {
            acc = mix::mix3(acc, self.digest_cluster(r), 0x51);
        }
        acc
    }

    fn canon_site(&self, s: Site) -> u64 {
        let owner = self.sites[s as usize].owner;
        let pos = self.chains[owner as usize].iter().position(|&x| x == s).unwrap();
        ((owner as u64) << 16) | pos as u64
    }

    fn digest_cluster(&self, id: ClusterId) -> u64 {
        let node = self.clusters.get(id);
        let tag = match &node.kind {
            ClusterKind::LeafVertex => 1,
            ClusterKind::LeafEdge { .. } => 2,
            ClusterKind::Unary { .. } => 3,
            ClusterKind::Binary { .. } => 4,
            ClusterKind::Nullary => 5,
        };
        let mut acc = mix::mix3(tag, node.round as u64, 0x77);
        for b in node.boundary() {
            acc = mix::mix3(acc, self.canon_site(b), 0x78);
        }
        if let Some((k, id)) = node.path_max() {
            acc = mix::mix3(acc, k.weight as u64, id.0);
        }
        if !matches!(node.kind, ClusterKind::LeafEdge { .. }) {
            acc = mix::mix3(acc, self.canon_site(node.rep), 0x79);
        }
        for &k in &node.kids {
            acc = mix::mix3(acc, self.digest_cluster(k), 0x7a);
        }
        acc
    }
}

/// Constant-time view of one cluster.
#[derive(Clone, Copy)]
pub struct ClusterRef<'a> {
    f: &'a RcForest,
    id: ClusterId,
}

impl<'a> ClusterRef<'a> {
    pub fn id(&self) -> ClusterId {
        self.id
    }

    pub fn kind(&self) -> &'a ClusterKind {
        &self.f.clusters.get(self.id).kind
    }

    /// Boundary sites (vertices outside the cluster touching an edge
    /// inside it): none for roots and vertex leaves, one for rake
    /// clusters, two for path-shaped clusters.
    pub fn boundary(&self) -> ArrayVec<Site, 2> {
        self.f.clusters.get(self.id).boundary()
    }

    pub fn children(&self) -> impl Iterator<Item = ClusterRef<'a>> + '_ {
        let f = self.f;
        self.f.clusters.get(self.id).kids.iter().map(move |&k| ClusterRef { f, id: k })
    }

    pub fn child_count(&self) -> usize {
        self.f.clusters.get(self.id).kids.len()
    }

    /// Representative site of a non-leaf cluster (the vertex that
    /// contracted to form it).
    pub fn representative(&self) -> Site {
        self.f.clusters.get(self.id).rep
    }

    /// Heaviest real edge between the two boundary vertices of a
    /// path-shaped cluster. `Ok(None)` when the path is all dummy edges.
    pub fn path_weight(&self) -> Result<PathMax, RcError> {
        let node = self.f.clusters.get(self.id);
        if node.is_path_shaped() {
            Ok(node.path_max())
        } else {
            Err(RcError::NotABinaryCluster)
        }
    }

    pub fn parent(&self) -> Option<ClusterRef<'a>> {
        self.f.clusters.get(self.id).parent.map(|p| ClusterRef { f: self.f, id: p })
    }

    pub fn is_marked(&self) -> bool {
        self.f.clusters.get(self.id).marked
    }

    pub fn is_leaf_vertex(&self) -> bool {
        matches!(self.f.clusters.get(self.id).kind, ClusterKind::LeafVertex)
    }

    pub fn is_root(&self) -> bool {
        self.f.clusters.get(self.id).parent.is_none()
    }
}
