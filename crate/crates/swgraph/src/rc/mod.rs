//! Rake-compress trees over a bounded-degree forest.
//!
//! The forest is stored ternarized: a vertex of degree > 3 is represented by
//! a chain of sites joined by dummy edges, so every site has degree at most
//! three. Contraction proceeds in synchronous rounds (leaves rake, degree-two
//! sites compress when they win a coin contest against adjacent degree-two
//! sites), producing one cluster per site. Batch link and cut re-run the
//! contraction only where decisions could have changed, splicing fresh
//! clusters into the otherwise untouched tree.

mod cluster;
mod contract;
mod query;
mod validate;

pub use cluster::{pathmax_merge, ClusterId, ClusterKind, PathMax};
pub use query::ClusterRef;
pub(crate) use cluster::{ClusterArena, NO_CLUSTER};

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use arrayvec::ArrayVec;

use crate::graph::{EdgeId, KeyedEdge, VertexId};

pub(crate) type Site = u32;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) struct AdjEntry {
    pub to: Site,
    pub cluster: ClusterId,
}

/// Adjacency of one site in one contraction round. Sorted by neighbor.
pub(crate) type Adj = ArrayVec<AdjEntry, 3>;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) enum FateKind {
    Raked { into: Site },
    Compressed,
    Finalized,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Fate {
    pub kind: FateKind,
    pub cluster: ClusterId,
}

pub(crate) struct SiteRec {
    /// Stable identity for coin flips; never reused even if the slot is.
    pub uid: u64,
    pub owner: VertexId,
    pub leaf: ClusterId,
    /// Adjacency per contraction round while alive; the site contracts at
    /// round `snaps.len() - 1`.
    pub snaps: Vec<Adj>,
    pub fate: Option<Fate>,
    pub tomb: bool,
}

pub(crate) struct EdgeRec {
    pub a: Site,
    pub b: Site,
    pub leaf: ClusterId,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RcError {
    /// `build` was handed a cyclic edge set.
    NotAForest,
    /// A linked edge would close a cycle.
    CycleClosed,
    UnknownEdge(EdgeId),
    DuplicateEdge(EdgeId),
    VertexOutOfRange { vertex: VertexId, n: usize },
    /// `path_weight` on a cluster that is not path shaped.
    NotABinaryCluster,
}

impl fmt::Display for RcError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RcError::NotAForest => write!(f, "not a forest"),
            RcError::CycleClosed => write!(f, "cycle"),
            RcError::UnknownEdge(id) => write!(f, "absent edge {id}"),
            RcError::DuplicateEdge(id) => write!(f, "duplicate edge {id}"),
            RcError::VertexOutOfRange { vertex, n } => {
                write!(f, "vertex {vertex} out of range (n = {n})")
            }
            RcError::NotABinaryCluster => write!(f, "weight query on non-binary cluster"),
        }
    }
}

impl std::error::Error for RcError {}

/// Work accumulated while editing the round-zero forest, consumed by the
/// change-propagation pass.
#[derive(Default)]
pub(crate) struct UpdateCtx {
    /// First-touch captures of old round-zero adjacency. `None` = the site
    /// did not exist before this batch.
    pub changed0: HashMap<Site, Option<Adj>>,
    /// Sites whose old life beyond some round has to be replayed as
    /// disappearing, one round at a time.
    pub vanishing: Vec<contract::VanishRec>,
    /// Sites that must rebuild their cluster at their death round because a
    /// child cluster id changed underneath them.
    pub pending: BTreeSet<Site>,
}

pub struct RcForest {
    n: usize,
    seed: u64,
    pub(crate) sites: Vec<SiteRec>,
    free_sites: Vec<Site>,
    next_uid: u64,
    /// Sites representing each original vertex, in chain order. The first
    /// entry is the primary site and always equals the vertex id.
    pub(crate) chains: Vec<Vec<Site>>,
    pub(crate) clusters: ClusterArena,
    pub(crate) edges: HashMap<EdgeId, EdgeRec>,
    pub(crate) roots: BTreeSet<ClusterId>,
    /// Clusters flagged by the last `mark` call, for cheap unmarking.
    pub(crate) mark_trail: Vec<ClusterId>,
    pub(crate) marked_sites: BTreeSet<Site>,
    /// Pending tombstoned sites, physically freed at batch end.
    tombs: Vec<Site>,
}

impl RcForest {
    /// Forest with `n` isolated vertices.
    pub fn new(n: usize, seed: u64) -> Self {
        let mut f = RcForest {
            n,
            seed,
            sites: Vec::with_capacity(n),
            free_sites: Vec::new(),
            next_uid: 0,
            chains: Vec::with_capacity(n),
            clusters: ClusterArena::default(),
            edges: HashMap::new(),
            roots: BTreeSet::new(),
            mark_trail: Vec::new(),
            marked_sites: BTreeSet::new(),
            tombs: Vec::new(),
        };
        for v in 0..n as u32 {
            let leaf = f.clusters.alloc(ClusterKind::LeafVertex, v, 0, ArrayVec::new());
            let mut kids = ArrayVec::new();
            kids.push(leaf);
            let root = f.clusters.alloc(ClusterKind::Nullary, v, 0, kids);
            f.clusters.get_mut(leaf).parent = Some(root);
            f.roots.insert(root);
            f.sites.push(SiteRec {
                uid: v as u64,
                owner: v,
                leaf,
                snaps: vec![Adj::new()],
                fate: Some(Fate { kind: FateKind::Finalized, cluster: root }),
                tomb: false,
            });
            f.chains.push(vec![v]);
        }
        f.next_uid = n as u64;
        f
    }

    /// Builds the tree for a whole forest at once.
    pub fn build(n: usize, seed: u64, edges: &[KeyedEdge]) -> Result<Self, RcError> {
        let mut f = Self::new(n, seed);
        f.batch_link(edges).map_err(|e| match e {
            RcError::CycleClosed => RcError::NotAForest,
            other => other,
        })?;
        Ok(f)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains_edge(&self, id: EdgeId) -> bool {
        self.edges.contains_key(&id)
    }

    /// One root cluster per component.
    pub fn component_count(&self) -> usize {
        self.roots.len()
    }

    fn check_vertex(&self, v: VertexId) -> Result<(), RcError> {
        if (v as usize) < self.n {
            Ok(())
        } else {
            Err(RcError::VertexOutOfRange { vertex: v, n: self.n })
        }
    }

    /// Links a batch of edges. The batch is validated first (vertex bounds,
    /// id freshness, acyclicity of the result) and rejected atomically.
    pub fn batch_link(&mut self, links: &[KeyedEdge]) -> Result<(), RcError> {
        debug_assert!(self.mark_trail.is_empty(), "mutation while marked");
        for e in links {
            self.check_vertex(e.u)?;
            self.check_vertex(e.v)?;
            if e.u == e.v {
                return Err(RcError::CycleClosed);
            }
            if self.edges.contains_key(&e.id) {
                return Err(RcError::DuplicateEdge(e.id));
            }
        }
        // Cycle check against current components plus the batch itself.
        {
            let mut union: HashMap<ClusterId, ClusterId> = HashMap::new();
            fn find(u: &mut HashMap<ClusterId, ClusterId>, mut x: ClusterId) -> ClusterId {
                while let Some(&p) = u.get(&x) {
                    if p == x {
                        break;
                    }
                    x = p;
                }
                x
            }
            for e in links {
                let ru = find(&mut union, self.root_of_site(e.u as Site));
                let rv = find(&mut union, self.root_of_site(e.v as Site));
                if ru == rv {
                    return Err(RcError::CycleClosed);
                }
                union.insert(ru, rv);
                union.insert(rv, rv);
            }
        }
        let mut ctx = UpdateCtx::default();
        for e in links {
            let su = self.attach_site(&mut ctx, e.u);
            let sv = self.attach_site(&mut ctx, e.v);
            let leaf = self.clusters.alloc(
                ClusterKind::LeafEdge { a: su, b: sv, payload: Some((e.key, e.id)) },
                NO_CLUSTER,
                0,
                ArrayVec::new(),
            );
            self.edges.insert(e.id, EdgeRec { a: su, b: sv, leaf });
            self.add_edge0(&mut ctx, su, sv, leaf);
        }
        self.propagate(ctx);
        Ok(())
    }

    /// Cuts a batch of edges by id. Unknown ids reject the whole batch.
    pub fn batch_cut(&mut self, ids: &[EdgeId]) -> Result<(), RcError> {
        debug_assert!(self.mark_trail.is_empty(), "mutation while marked");
        for id in ids {
            if !self.edges.contains_key(id) {
                return Err(RcError::UnknownEdge(*id));
            }
        }
        let mut seen = BTreeSet::new();
        for id in ids {
            if !seen.insert(*id) {
                return Err(RcError::UnknownEdge(*id)); // duplicate in batch
            }
        }
        let mut ctx = UpdateCtx::default();
        let mut owners = BTreeSet::new();
        for id in ids {
            let rec = self.edges.remove(id).unwrap();
            self.remove_edge0(&mut ctx, rec.a, rec.b);
            self.retire_cluster(rec.leaf);
            owners.insert(self.sites[rec.a as usize].owner);
            owners.insert(self.sites[rec.b as usize].owner);
        }
        for v in owners {
            self.shrink_chain(&mut ctx, v);
        }
        self.propagate(ctx);
        Ok(())
    }

    // ---- round-zero forest edits ------------------------------------

    fn touch0(&mut self, ctx: &mut UpdateCtx, s: Site) {
        let rec = &self.sites[s as usize];
        let old = if rec.tomb { None } else { Some(rec.snaps[0].clone()) };
        ctx.changed0.entry(s).or_insert(old);
    }

    fn add_edge0(&mut self, ctx: &mut UpdateCtx, a: Site, b: Site, leaf: ClusterId) {
        debug_assert_ne!(a, b);
        self.touch0(ctx, a);
        self.touch0(ctx, b);
        for (x, y) in [(a, b), (b, a)] {
            let adj = &mut self.sites[x as usize].snaps[0];
            debug_assert!(adj.len() < 3, "degree overflow at site {x}");
            let pos = adj.iter().position(|e| e.to > y).unwrap_or(adj.len());
            adj.insert(pos, AdjEntry { to: y, cluster: leaf });
        }
    }

    fn remove_edge0(&mut self, ctx: &mut UpdateCtx, a: Site, b: Site) {
        self.touch0(ctx, a);
        self.touch0(ctx, b);
        for (x, y) in [(a, b), (b, a)] {
            let adj = &mut self.sites[x as usize].snaps[0];
            let pos = adj.iter().position(|e| e.to == y).expect("edge not present");
            adj.remove(pos);
        }
    }

    fn retire_cluster(&mut self, id: ClusterId) {
        if let ClusterKind::Nullary = self.clusters.get(id).kind {
            self.roots.remove(&id);
        }
        self.clusters.retire(id);
    }

    fn new_site(&mut self, ctx: &mut UpdateCtx, owner: VertexId) -> Site {
        let uid = self.next_uid;
        self.next_uid += 1;
        let leaf = self.clusters.alloc(ClusterKind::LeafVertex, NO_CLUSTER, 0, ArrayVec::new());
        let rec = SiteRec { uid, owner, leaf, snaps: vec![Adj::new()], fate: None, tomb: false };
        let s = if let Some(s) = self.free_sites.pop() {
            self.sites[s as usize] = rec;
            s
        } else {
            self.sites.push(rec);
            (self.sites.len() - 1) as Site
        };
        self.clusters.get_mut(self.sites[s as usize].leaf).rep = s;
        ctx.changed0.insert(s, None);
        s
    }

    /// Tombstones a dummy site whose edges have already been removed.
    fn destroy_site(&mut self, ctx: &mut UpdateCtx, s: Site) {
        self.touch0(ctx, s);
        let tail: Vec<Adj> = self.sites[s as usize].snaps.get(1..).unwrap_or(&[]).to_vec();
        if !tail.is_empty() {
            ctx.vanishing.push(contract::VanishRec::new(s, tail));
        }
        if let Some(fate) = self.sites[s as usize].fate.take() {
            if let FateKind::Raked { into } = fate.kind {
                ctx.pending.insert(into);
            }
            self.retire_cluster(fate.cluster);
        }
        let leaf = self.sites[s as usize].leaf;
        self.retire_cluster(leaf);
        let rec = &mut self.sites[s as usize];
        rec.snaps.clear();
        rec.tomb = true;
        self.tombs.push(s);
    }

    fn is_real_entry(&self, e: &AdjEntry) -> bool {
        matches!(
            &self.clusters.get(e.cluster).kind,
            ClusterKind::LeafEdge { payload: Some(_), .. }
        )
    }

    fn real_degree0(&self, s: Site) -> usize {
        self.sites[s as usize].snaps[0]
            .iter()
            .filter(|e| self.is_real_entry(e))
            .count()
    }

    /// Finds a site of `v`'s chain with a free adjacency slot, extending
    /// the chain with a fresh dummy site when the whole chain is full.
    fn attach_site(&mut self, ctx: &mut UpdateCtx, v: VertexId) -> Site {
        for &s in &self.chains[v as usize] {
            if self.sites[s as usize].snaps[0].len() < 3 {
                return s;
            }
        }
        let last = *self.chains[v as usize].last().unwrap();
        let fresh = self.new_site(ctx, v);
        // The full tail site holds at most two dummy edges, so it has at
        // least one real edge we can shift onto the new site.
        let moved = self.sites[last as usize].snaps[0]
            .iter()
            .find(|e| self.is_real_entry(e))
            .copied()
            .expect("full chain site without a real edge");
        let payload = self.clusters.get(moved.cluster).path_max();
        let moved_id = payload.expect("real edge carries a payload").1;
        self.remove_edge0(ctx, last, moved.to);
        self.retire_cluster(moved.cluster);
        let new_leaf = self.clusters.alloc(
            ClusterKind::LeafEdge { a: fresh, b: moved.to, payload },
            NO_CLUSTER,
            0,
            ArrayVec::new(),
        );
        self.add_edge0(ctx, fresh, moved.to, new_leaf);
        let rec = self.edges.get_mut(&moved_id).unwrap();
        if rec.a == last {
            rec.a = fresh;
        } else {
            debug_assert_eq!(rec.b, last);
            rec.b = fresh;
        }
        rec.leaf = new_leaf;
        // Chain the new site behind the old tail with a dummy edge.
        let dummy = self.clusters.alloc(
            ClusterKind::LeafEdge { a: last, b: fresh, payload: None },
            NO_CLUSTER,
            0,
            ArrayVec::new(),
        );
        self.add_edge0(ctx, last, fresh, dummy);
        self.chains[v as usize].push(fresh);
        fresh
    }

    /// Splices out dummy sites of `v` that no longer hold a real edge.
    fn shrink_chain(&mut self, ctx: &mut UpdateCtx, v: VertexId) {
        loop {
            let chain = &self.chains[v as usize];
            let Some(idx) = (1..chain.len()).find(|&i| self.real_degree0(chain[i]) == 0) else {
                return;
            };
            let s = self.chains[v as usize][idx];
            let prev = self.chains[v as usize][idx - 1];
            let next = self.chains[v as usize].get(idx + 1).copied();
            let prev_entry = self.sites[s as usize].snaps[0]
                .iter()
                .find(|e| e.to == prev)
                .copied()
                .expect("chain dummy edge missing");
            self.remove_edge0(ctx, s, prev);
            self.retire_cluster(prev_entry.cluster);
            if let Some(next) = next {
                let next_entry = self.sites[s as usize].snaps[0]
                    .iter()
                    .find(|e| e.to == next)
                    .copied()
                    .expect("chain dummy edge missing");
                self.remove_edge0(ctx, s, next);
                self.retire_cluster(next_entry.cluster);
                let bridge = self.clusters.alloc(
                    ClusterKind::LeafEdge { a: prev, b: next, payload: None },
                    NO_CLUSTER,
                    0,
                    ArrayVec::new(),
                );
                self.add_edge0(ctx, prev, next, bridge);
            }
            debug_assert!(self.sites[s as usize].snaps[0].is_empty());
            self.chains[v as usize].remove(idx);
            self.destroy_site(ctx, s);
        }
    }

    pub(crate) fn flush_batch(&mut self) {
        for s in std::mem::take(&mut self.tombs) {
            self.free_sites.push(s);
        }
        self.clusters.flush_graveyard();
    }

    // ---- shared helpers ----------------------------------------------

    pub(crate) fn primary_site(&self, v: VertexId) -> Site {
        debug_assert_eq!(self.chains[v as usize][0], v as Site);
        v as Site
    }

    pub(crate) fn root_of_site(&self, s: Site) -> ClusterId {
        let mut c = self.sites[s as usize].leaf;
        while let Some(p) = self.clusters.get(c).parent {
            c = p;
        }
        c
    }

    pub(crate) fn site_alive_at(&self, s: Site, round: u32) -> bool {
        let rec = &self.sites[s as usize];
        !rec.tomb && rec.snaps.len() > round as usize
    }

    pub(crate) fn site_coin(&self, s: Site, round: u32) -> bool {
        crate::mix::coin(self.seed, self.sites[s as usize].uid, round as u64)
    }

    /// Number of rounds the slowest component took to contract.
    pub fn contraction_rounds(&self) -> usize {
        self.sites.iter().filter(|s| !s.tomb).map(|s| s.snaps.len()).max().unwrap_or(0)
    }
}
