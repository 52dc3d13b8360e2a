//! Compressed path tree extraction.
//!
//! Given a forest and a set of marked vertices, the compressed path tree is
//! the smallest tree over the marked vertices plus Steiner vertices that
//! answers every pairwise heaviest-edge query exactly like the original
//! forest. It is produced by a top-down walk of the marked rake-compress
//! tree: an unmarked cluster is emitted as a single summary edge without
//! being entered, a marked cluster recurses into its children and then
//! prunes its representative if it turned out redundant.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use arrayvec::ArrayVec;

use crate::graph::{EdgeId, VertexId, WeightKey};
use crate::rc::{pathmax_merge, ClusterId, ClusterKind, PathMax, RcError, RcForest};

type Site = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct WorkEdge {
    to: Site,
    pm: PathMax,
}

/// Mutable working graph over sites. Degrees never exceed three because
/// every working edge stands for a distinct forest edge at that site.
#[derive(Default)]
pub struct WorkGraph {
    adj: HashMap<Site, ArrayVec<WorkEdge, 3>>,
    marked: BTreeSet<Site>,
}

impl WorkGraph {
    pub fn new(marked: BTreeSet<Site>) -> Self {
        WorkGraph { adj: HashMap::new(), marked }
    }

    pub fn is_marked(&self, v: Site) -> bool {
        self.marked.contains(&v)
    }

    pub fn add_vertex(&mut self, v: Site) {
        self.adj.entry(v).or_default();
    }

    pub fn contains_vertex(&self, v: Site) -> bool {
        self.adj.contains_key(&v)
    }

    pub fn degree(&self, v: Site) -> usize {
        self.adj.get(&v).map_or(0, |a| a.len())
    }

    pub fn add_edge(&mut self, a: Site, b: Site, pm: PathMax) {
        debug_assert_ne!(a, b, "self edge in working graph");
        self.add_vertex(a);
        self.add_vertex(b);
        self.adj.get_mut(&a).unwrap().push(WorkEdge { to: b, pm });
        self.adj.get_mut(&b).unwrap().push(WorkEdge { to: a, pm });
    }

    fn remove_edge(&mut self, a: Site, b: Site) -> PathMax {
        let adj_a = self.adj.get_mut(&a).unwrap();
        let i = adj_a.iter().position(|e| e.to == b).expect("missing edge");
        let pm = adj_a.remove(i).pm;
        let adj_b = self.adj.get_mut(&b).unwrap();
        let j = adj_b.iter().position(|e| e.to == a).expect("missing edge");
        adj_b.remove(j);
        pm
    }

    fn remove_vertex(&mut self, v: Site) {
        debug_assert_eq!(self.degree(v), 0);
        self.adj.remove(&v);
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.values().map(|a| a.len()).sum::<usize>() / 2
    }

    fn neighbors(&self, v: Site) -> &[WorkEdge] {
        self.adj.get(&v).map_or(&[], |a| a.as_slice())
    }
}

/// If `v` is unmarked and has degree exactly two, splices it out, replacing
/// its two incident edges by one carrying the heavier summary. Otherwise a
/// no-op.
pub fn splice_out(g: &mut WorkGraph, v: Site) {
    if g.is_marked(v) || g.degree(v) != 2 {
        return;
    }
    let n = g.neighbors(v);
    let (a, b) = (n[0].to, n[1].to);
    let pm_a = g.remove_edge(v, a);
    let pm_b = g.remove_edge(v, b);
    g.remove_vertex(v);
    g.add_edge(a, b, pathmax_merge(pm_a, pm_b));
}

/// Removes `v` if it is a redundant vertex: degree two means splice, an
/// unmarked leaf is deleted together with its edge (after which its
/// neighbor may have become degree two and is spliced in turn).
pub fn prune(g: &mut WorkGraph, v: Site) {
    if g.degree(v) == 2 {
        splice_out(g, v);
    } else if g.degree(v) == 1 && !g.is_marked(v) {
        let u = g.neighbors(v)[0].to;
        g.remove_edge(v, u);
        g.remove_vertex(v);
        splice_out(g, u);
    }
}

/// Emits the compressed path tree of one cluster into `g`, assuming the
/// cluster's boundary vertices are marked. Unmarked clusters contribute a
/// summary without being entered.
pub(crate) fn expand_cluster(
    f: &RcForest,
    c: ClusterId,
    g: &mut WorkGraph,
    visited: &mut usize,
) {
    *visited += 1;
    let node = f.cluster(c);
    if !node.is_marked() {
        match node.kind() {
            ClusterKind::LeafEdge { a, b, payload } => g.add_edge(*a, *b, *payload),
            ClusterKind::Binary { bounds, pathmax } => {
                g.add_edge(bounds[0], bounds[1], *pathmax)
            }
            ClusterKind::Unary { boundary } => g.add_vertex(*boundary),
            ClusterKind::Nullary | ClusterKind::LeafVertex => {}
        }
        return;
    }
    if node.is_leaf_vertex() {
        g.add_vertex(node.representative());
        return;
    }
    let kids: Vec<ClusterId> = node.children().map(|k| k.id()).collect();
    for k in kids {
        expand_cluster(f, k, g, visited);
    }
    prune(g, node.representative());
}

/// One edge of a compressed path tree: the summary of a forest path whose
/// heaviest real edge is `origin` with key `key`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CptEdge {
    pub a: VertexId,
    pub b: VertexId,
    pub key: WeightKey,
    pub origin: EdgeId,
}

/// Compressed path tree over original vertices: the marked vertices plus
/// any Steiner vertices the paths forced to stay.
#[derive(Clone, Debug, Default)]
pub struct CompressedPathTree {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<CptEdge>,
    /// Clusters visited during extraction (laziness instrumentation).
    pub visited_clusters: usize,
}

/// Extracts the compressed path trees of every component containing a
/// marked vertex. The forest's mark state is used transiently and cleaned
/// up before returning.
pub fn compressed_path_trees(
    f: &mut RcForest,
    marked: &[VertexId],
) -> Result<CompressedPathTree, RcError> {
    for &v in marked {
        if v as usize >= f.n() {
            return Err(RcError::VertexOutOfRange { vertex: v, n: f.n() });
        }
    }
    let mut sorted: Vec<VertexId> = marked.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.is_empty() {
        return Ok(CompressedPathTree::default());
    }
    f.mark(&sorted);
    let marked_sites: BTreeSet<Site> = sorted.iter().map(|&v| v as Site).collect();
    let mut g = WorkGraph::new(marked_sites);
    let mut visited = 0usize;
    let mut seen_roots = BTreeSet::new();
    for &v in &sorted {
        let root = f.root_of_vertex(v);
        if !seen_roots.insert(root.id()) {
            continue;
        }
        debug_assert!(root.is_marked());
        expand_cluster(f, root.id(), &mut g, &mut visited);
    }
    f.unmark();

    // Translate sites back to original vertices: contract dummy-only
    // summary edges (they join sites of one vertex), then relabel.
    let mut parent: BTreeMap<Site, Site> = g.adj.keys().map(|&s| (s, s)).collect();
    fn find(parent: &mut BTreeMap<Site, Site>, mut x: Site) -> Site {
        while parent[&x] != x {
            let up = parent[&parent[&x]];
            parent.insert(x, up);
            x = up;
        }
        x
    }
    for (&s, adj) in &g.adj {
        for e in adj {
            if e.pm.is_none() {
                let (ra, rb) = (find(&mut parent, s), find(&mut parent, e.to));
                if ra != rb {
                    parent.insert(ra.min(rb), ra.max(rb));
                }
            }
        }
    }
    let mut vertices = BTreeSet::new();
    let mut edges = Vec::new();
    for &s in g.adj.keys() {
        let canon = find(&mut parent, s);
        vertices.insert(f.site_owner(canon));
    }
    for (&s, adj) in &g.adj {
        for e in adj {
            if e.to < s {
                continue; // visit each edge once
            }
            let Some((key, origin)) = e.pm else { continue };
            let a = f.site_owner(find(&mut parent, s));
            let b = f.site_owner(find(&mut parent, e.to));
            debug_assert_ne!(a, b, "real summary edge collapsed to a loop");
            let (a, b) = (a.min(b), a.max(b));
            edges.push(CptEdge { a, b, key, origin });
        }
    }
    edges.sort_by_key(|e| (e.a, e.b, e.origin));
    debug_assert!(edges.windows(2).all(|p| p[0] != p[1]), "parallel summary edges");
    Ok(CompressedPathTree {
        vertices: vertices.into_iter().collect(),
        edges,
        visited_clusters: visited,
    })
}
