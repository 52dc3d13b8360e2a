//! Exhaustive structural checker used by tests and the fuzz harness. Walks
//! every invariant the tree is supposed to keep: round-zero forest shape,
//! per-round contraction validity, cluster boundary algebra, disjoint
//! union of leaves, and path-maximum augmentation against a brute-force
//! walk of the underlying forest.

use std::collections::{BTreeMap, BTreeSet};

use super::cluster::{pathmax_merge, ClusterId, ClusterKind, PathMax};
use super::{FateKind, RcForest, Site};

macro_rules! ensure {
    ($cond:expr, $($msg:tt)*) => {
        if !$cond {
            return Err(format!($($msg)*));
        }
    };
}

impl RcForest {
    /// Full invariant walk; returns the first violation found.
    pub fn validate(&self) -> Result<(), String> {
        self.validate_sites()?;
        self.validate_rounds()?;
        self.validate_clusters()?;
        Ok(())
    }

    fn live_sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.sites.len() as Site).filter(|&s| !self.sites[s as usize].tomb)
    }

    fn validate_sites(&self) -> Result<(), String> {
        // Chains: primary site first, dummy edges between consecutive
        // members, degree bound everywhere.
        for v in 0..self.n() as u32 {
            let chain = &self.chains[v as usize];
            ensure!(chain[0] == v, "vertex {v}: primary site is {}", chain[0]);
            for &s in chain {
                ensure!(!self.sites[s as usize].tomb, "vertex {v}: tombstoned chain site {s}");
                ensure!(self.sites[s as usize].owner == v, "site {s}: wrong owner");
                let deg = self.sites[s as usize].snaps[0].len();
                ensure!(deg <= 3, "site {s}: degree {deg}");
            }
            for pair in chain.windows(2) {
                let adj = &self.sites[pair[0] as usize].snaps[0];
                let entry = adj.iter().find(|e| e.to == pair[1]);
                ensure!(entry.is_some(), "vertex {v}: chain gap {} -> {}", pair[0], pair[1]);
                let kind = &self.clusters.get(entry.unwrap().cluster).kind;
                ensure!(
                    matches!(kind, ClusterKind::LeafEdge { payload: None, .. }),
                    "vertex {v}: chain edge is not a dummy edge"
                );
            }
        }
        for s in self.live_sites() {
            let rec = &self.sites[s as usize];
            ensure!(!rec.snaps.is_empty(), "site {s}: no snapshots");
            ensure!(rec.fate.is_some(), "site {s}: undecided fate");
            // Adjacency symmetric and sorted at round zero.
            let mut last = None;
            for e in &rec.snaps[0] {
                ensure!(Some(e.to) > last, "site {s}: unsorted adjacency");
                last = Some(e.to);
                let back = self.sites[e.to as usize].snaps[0].iter().any(|x| x.to == s);
                ensure!(back, "site {s}: asymmetric edge to {}", e.to);
            }
        }
        // Edge registry matches round-zero adjacency.
        for (id, rec) in &self.edges {
            let entry = self.sites[rec.a as usize].snaps[0]
                .iter()
                .find(|e| e.to == rec.b && e.cluster == rec.leaf);
            ensure!(entry.is_some(), "edge {id}: registry does not match adjacency");
            match &self.clusters.get(rec.leaf).kind {
                ClusterKind::LeafEdge { payload: Some((_, pid)), .. } => {
                    ensure!(pid == id, "edge {id}: payload id mismatch")
                }
                _ => return Err(format!("edge {id}: leaf cluster is not a real edge")),
            }
        }
        Ok(())
    }

    /// Re-runs every contraction round from scratch and compares with the
    /// stored snapshots and fates.
    fn validate_rounds(&self) -> Result<(), String> {
        let rounds = self.contraction_rounds();
        for r in 0..rounds as u32 {
            let alive: Vec<Site> =
                self.live_sites().filter(|&s| self.site_alive_at(s, r)).collect();
            for &s in &alive {
                let adj = &self.sites[s as usize].snaps[r as usize];
                for e in adj {
                    ensure!(
                        self.site_alive_at(e.to, r),
                        "round {r}: site {s} lists dead neighbor {}",
                        e.to
                    );
                }
                let survives = self.site_alive_at(s, r + 1);
                let dies_here = self.sites[s as usize].snaps.len() == r as usize + 1;
                ensure!(survives != dies_here, "round {r}: site {s} both lives and dies");
                let expected = self.reference_decision(s, r);
                match expected {
                    None => {
                        ensure!(survives, "round {r}: site {s} died but should survive");
                        // Check the stored next snapshot against a rebuild.
                        let rebuilt = self.reference_next(s, r)?;
                        let stored = &self.sites[s as usize].snaps[r as usize + 1];
                        ensure!(
                            rebuilt.as_slice() == stored.as_slice(),
                            "round {r}: site {s} next-round adjacency mismatch"
                        );
                    }
                    Some(kind) => {
                        ensure!(dies_here, "round {r}: site {s} survived but should die");
                        let fate = self.sites[s as usize].fate.unwrap();
                        ensure!(
                            fate.kind == kind,
                            "round {r}: site {s} fate {:?} expected {:?}",
                            fate.kind,
                            kind
                        );
                    }
                }
            }
        }
        Ok(())
    }

    /// The decision a site should make at round `r`: `None` = survive.
    fn reference_decision(&self, s: Site, r: u32) -> Option<FateKind> {
        let ri = r as usize;
        let adj = &self.sites[s as usize].snaps[ri];
        let deg = |x: Site| self.sites[x as usize].snaps[ri].len();
        match adj.len() {
            0 => Some(FateKind::Finalized),
            1 => {
                let y = adj[0].to;
                if deg(y) == 1 && self.sites[s as usize].uid >= self.sites[y as usize].uid {
                    None
                } else {
                    Some(FateKind::Raked { into: y })
                }
            }
            2 => {
                let (y1, y2) = (adj[0].to, adj[1].to);
                if deg(y1) >= 2
                    && deg(y2) >= 2
                    && self.site_coin(s, r)
                    && !(deg(y1) == 2 && self.site_coin(y1, r))
                    && !(deg(y2) == 2 && self.site_coin(y2, r))
                {
                    Some(FateKind::Compressed)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    fn reference_next(&self, s: Site, r: u32) -> Result<Vec<super::AdjEntry>, String> {
        let ri = r as usize;
        let mut next = Vec::new();
        for e in &self.sites[s as usize].snaps[ri] {
            match self.reference_decision(e.to, r) {
                None => next.push(*e),
                Some(FateKind::Raked { into }) => {
                    ensure!(into == s, "round {r}: {} raked away from its only edge", e.to)
                }
                Some(FateKind::Compressed) => {
                    let yadj = &self.sites[e.to as usize].snaps[ri];
                    let other = if yadj[0].to == s { yadj[1].to } else { yadj[0].to };
                    let cluster =
                        self.sites[e.to as usize].fate.expect("compressed without fate").cluster;
                    next.push(super::AdjEntry { to: other, cluster });
                }
                Some(FateKind::Finalized) => {
                    return Err(format!("round {r}: finalizing site {} had an edge", e.to))
                }
            }
        }
        next.sort_by_key(|e| e.to);
        Ok(next)
    }

    fn validate_clusters(&self) -> Result<(), String> {
        // Expected leaves.
        let mut expected_leaves: BTreeSet<ClusterId> = BTreeSet::new();
        for s in self.live_sites() {
            expected_leaves.insert(self.sites[s as usize].leaf);
        }
        for rec in self.edges.values() {
            expected_leaves.insert(rec.leaf);
        }
        // Dummy chain edges are in no registry; collect from adjacency.
        for s in self.live_sites() {
            for e in &self.sites[s as usize].snaps[0] {
                expected_leaves.insert(e.cluster);
            }
        }

        let mut seen_leaves: BTreeSet<ClusterId> = BTreeSet::new();
        for root in self.roots.iter().copied() {
            let node = self.clusters.get(root);
            ensure!(node.parent.is_none(), "root {root} has a parent");
            ensure!(
                matches!(node.kind, ClusterKind::Nullary),
                "root {root} is not a nullary cluster"
            );
            self.validate_cluster_tree(root, &mut seen_leaves)?;
        }
        ensure!(
            seen_leaves == expected_leaves,
            "leaf partition mismatch: {} reachable vs {} expected",
            seen_leaves.len(),
            expected_leaves.len()
        );
        // No stray live clusters outside the root forests.
        let mut reachable = 0usize;
        let mut stack: Vec<ClusterId> = self.roots.iter().copied().collect();
        while let Some(c) = stack.pop() {
            reachable += 1;
            stack.extend(self.clusters.get(c).kids.iter().copied());
        }
        ensure!(
            reachable == self.clusters.live_count(),
            "stray clusters: {reachable} reachable vs {} live",
            self.clusters.live_count()
        );
        Ok(())
    }

    fn validate_cluster_tree(
        &self,
        id: ClusterId,
        seen_leaves: &mut BTreeSet<ClusterId>,
    ) -> Result<(), String> {
        let node = self.clusters.get(id);
        match &node.kind {
            ClusterKind::LeafVertex | ClusterKind::LeafEdge { .. } => {
                ensure!(node.kids.is_empty(), "leaf cluster {id} has children");
                ensure!(seen_leaves.insert(id), "leaf cluster {id} reachable twice");
                return Ok(());
            }
            _ => {}
        }
        // Exactly one leaf-vertex child: the representative.
        let rep = node.rep;
        let mut rep_leaves = 0;
        for &k in &node.kids {
            let kid = self.clusters.get(k);
            ensure!(kid.parent == Some(id), "cluster {k}: bad parent link");
            if matches!(kid.kind, ClusterKind::LeafVertex) {
                ensure!(kid.rep == rep, "cluster {id}: foreign leaf vertex child");
                rep_leaves += 1;
            }
        }
        ensure!(rep_leaves == 1, "cluster {id}: {rep_leaves} leaf-vertex children");
        ensure!(
            self.sites[rep as usize].fate.map(|f| f.cluster) == Some(id),
            "cluster {id}: representative fate does not point back"
        );

        // Boundary algebra: the union of children boundaries is the
        // cluster boundary plus the representative; every non-leaf child
        // touches the representative.
        let own: BTreeSet<Site> = node.boundary().into_iter().collect();
        let mut kids_union: BTreeSet<Site> = BTreeSet::new();
        for &k in &node.kids {
            let kid = self.clusters.get(k);
            let kb: BTreeSet<Site> = kid.boundary().into_iter().collect();
            if !matches!(kid.kind, ClusterKind::LeafVertex) {
                ensure!(kb.contains(&rep), "cluster {id}: child {k} misses representative");
            }
            for b in &kb {
                ensure!(
                    *b == rep || own.contains(b),
                    "cluster {id}: child boundary {b} escapes"
                );
            }
            kids_union.extend(kb);
        }
        let mut want = own.clone();
        if !node.kids.is_empty() && node.kids.len() > 1 {
            want.insert(rep);
        }
        ensure!(
            kids_union == want || (node.kids.len() == 1 && kids_union.is_empty()),
            "cluster {id}: boundary algebra mismatch"
        );

        // Path-max augmentation against a brute-force walk.
        if let ClusterKind::Binary { bounds, pathmax } = &node.kind {
            let brute = self.brute_path_max(bounds[0], bounds[1])?;
            ensure!(
                brute == *pathmax,
                "cluster {id}: pathmax {:?} but walk says {:?}",
                pathmax,
                brute
            );
        }

        // Disjoint union: children leaf sets partition the node's leaves
        // (guaranteed by seen_leaves uniqueness while recursing).
        for &k in &node.kids {
            self.validate_cluster_tree(k, seen_leaves)?;
        }
        Ok(())
    }

    /// Brute-force path maximum between two sites over the round-zero
    /// forest, ignoring dummy edges.
    fn brute_path_max(&self, a: Site, b: Site) -> Result<PathMax, String> {
        let mut prev: BTreeMap<Site, (Site, PathMax)> = BTreeMap::new();
        let mut stack = vec![a];
        prev.insert(a, (a, None));
        while let Some(x) = stack.pop() {
            if x == b {
                break;
            }
            for e in &self.sites[x as usize].snaps[0] {
                if !prev.contains_key(&e.to) {
                    let pm = self.clusters.get(e.cluster).path_max();
                    prev.insert(e.to, (x, pm));
                    stack.push(e.to);
                }
            }
        }
        ensure!(prev.contains_key(&b), "no path between boundary sites {a} and {b}");
        let mut acc: PathMax = None;
        let mut x = b;
        while x != a {
            let (p, pm) = prev[&x];
            acc = pathmax_merge(acc, pm);
            x = p;
        }
        Ok(acc)
    }
}
