//! Cluster arena for the rake-compress tree. Leaf clusters are the sites
//! and edges of the bounded-degree forest; composite clusters are formed
//! when a site contracts and are immutable until invalidated by an update.

use arrayvec::ArrayVec;

use crate::graph::{EdgeId, WeightKey};

use super::Site;

pub type ClusterId = u32;
pub const NO_CLUSTER: ClusterId = u32::MAX;

/// Maximum weight over the real (non-dummy) edges of a path fragment.
/// `None` means the fragment consists of dummy edges only.
pub type PathMax = Option<(WeightKey, EdgeId)>;

pub fn pathmax_merge(a: PathMax, b: PathMax) -> PathMax {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(if x.0 >= y.0 { x } else { y }),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClusterKind {
    /// Base cluster for one site. No edges, hence no boundary.
    LeafVertex,
    /// Base cluster for one forest edge; both endpoints are boundary.
    /// `payload` is `None` for dummy (ternarization) edges.
    LeafEdge { a: Site, b: Site, payload: PathMax },
    /// Rake cluster: one boundary vertex.
    Unary { boundary: Site },
    /// Compress cluster: two boundary vertices and the heaviest real edge
    /// on the path between them.
    Binary { bounds: [Site; 2], pathmax: PathMax },
    /// Root cluster of a component.
    Nullary,
}

#[derive(Clone, Debug)]
pub struct ClusterNode {
    pub kind: ClusterKind,
    pub parent: Option<ClusterId>,
    /// Children in canonical order: representative leaf first, then the
    /// absorbed edge clusters, then absorbed rake clusters.
    pub kids: ArrayVec<ClusterId, 4>,
    /// Representative site (composites and leaf vertices).
    pub rep: Site,
    /// Contraction round at which the cluster formed (composites).
    pub round: u32,
    pub marked: bool,
    pub live: bool,
}

impl ClusterNode {
    pub fn is_path_shaped(&self) -> bool {
        matches!(self.kind, ClusterKind::LeafEdge { .. } | ClusterKind::Binary { .. })
    }

    pub fn path_max(&self) -> PathMax {
        match &self.kind {
            ClusterKind::LeafEdge { payload, .. } => *payload,
            ClusterKind::Binary { pathmax, .. } => *pathmax,
            _ => None,
        }
    }

    pub fn boundary(&self) -> ArrayVec<Site, 2> {
        let mut out = ArrayVec::new();
        match &self.kind {
            ClusterKind::LeafVertex | ClusterKind::Nullary => {}
            ClusterKind::LeafEdge { a, b, .. } => {
                out.push(*a);
                out.push(*b);
            }
            ClusterKind::Unary { boundary } => out.push(*boundary),
            ClusterKind::Binary { bounds, .. } => {
                out.push(bounds[0]);
                out.push(bounds[1]);
            }
        }
        out
    }
}

#[derive(Default)]
pub struct ClusterArena {
    nodes: Vec<ClusterNode>,
    free: Vec<ClusterId>,
    /// Ids freed during the current batch; not reusable until the batch
    /// ends so that damping comparisons never see a recycled id.
    graveyard: Vec<ClusterId>,
}

impl ClusterArena {
    pub fn alloc(
        &mut self,
        kind: ClusterKind,
        rep: Site,
        round: u32,
        kids: ArrayVec<ClusterId, 4>,
    ) -> ClusterId {
        let node = ClusterNode { kind, parent: None, kids, rep, round, marked: false, live: true };
        if let Some(id) = self.free.pop() {
            self.nodes[id as usize] = node;
            id
        } else {
            self.nodes.push(node);
            (self.nodes.len() - 1) as ClusterId
        }
    }

    /// Retires a cluster. Children keep living but are orphaned; whoever
    /// rebuilds their new parent re-links them.
    pub fn retire(&mut self, id: ClusterId) {
        debug_assert!(self.nodes[id as usize].live);
        let kids = std::mem::take(&mut self.nodes[id as usize].kids);
        for k in kids {
            let kid = &mut self.nodes[k as usize];
            if kid.parent == Some(id) {
                kid.parent = None;
            }
        }
        let node = &mut self.nodes[id as usize];
        node.live = false;
        node.parent = None;
        node.marked = false;
        self.graveyard.push(id);
    }

    pub fn flush_graveyard(&mut self) {
        self.free.append(&mut self.graveyard);
    }

    pub fn get(&self, id: ClusterId) -> &ClusterNode {
        debug_assert!(self.nodes[id as usize].live, "stale cluster id {id}");
        &self.nodes[id as usize]
    }

    pub fn get_mut(&mut self, id: ClusterId) -> &mut ClusterNode {
        debug_assert!(self.nodes[id as usize].live, "stale cluster id {id}");
        &mut self.nodes[id as usize]
    }

    pub fn is_live(&self, id: ClusterId) -> bool {
        (id as usize) < self.nodes.len() && self.nodes[id as usize].live
    }

    pub fn iter_live(&self) -> impl Iterator<Item = (ClusterId, &ClusterNode)> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.live)
            .map(|(i, n)| (i as ClusterId, n))
    }

    pub fn live_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.live).count()
    }
}
