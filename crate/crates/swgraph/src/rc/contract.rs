//! Round-synchronous tree contraction with change propagation.
//!
//! Each alive site makes a per-round decision from its own adjacency, its
//! neighbors' degrees, and keyed coins: degree-0 finalizes, degree-1 rakes
//! (adjacent leaves tie-break by uid), degree-2 compresses when it flips
//! heads and no adjacent degree-2 site does. Decisions are pure functions
//! of the round state and the seed, so after an update only sites near a
//! structural change can decide differently. The pass below re-runs each
//! round for exactly those sites, reuses clusters whose content is
//! unchanged, and lets id changes ripple upward until they damp out.

use arrayvec::ArrayVec;

use super::cluster::pathmax_merge;
use super::{Adj, AdjEntry, ClusterKind, Fate, FateKind, RcForest, Site, UpdateCtx};

/// Replays the disappearance of a site's old life one round at a time, so
/// former neighbors get re-examined in each round it used to be alive.
pub(crate) struct VanishRec {
    site: Site,
    tail: Vec<Adj>,
    cursor: usize,
}

impl VanishRec {
    pub(crate) fn new(site: Site, tail: Vec<Adj>) -> Self {
        VanishRec { site, tail, cursor: 0 }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Act {
    Survive,
    Rake { into: Site },
    Compress,
    Finalize,
}

/// Changed entries for one round: the site plus its old state at that
/// round (`None` = did not exist / was dead). Sorted by site.
type Changed = Vec<(Site, Option<Adj>)>;

fn lookup<'a>(changed: &'a Changed, s: Site) -> Option<&'a Option<Adj>> {
    changed
        .binary_search_by_key(&s, |(site, _)| *site)
        .ok()
        .map(|i| &changed[i].1)
}

impl RcForest {
    pub(crate) fn propagate(&mut self, ctx: UpdateCtx) {
        let UpdateCtx { changed0, vanishing, pending } = ctx;
        let mut changed: Changed = changed0
            .into_iter()
            .filter(|(s, old)| {
                let rec = &self.sites[*s as usize];
                match (old, rec.tomb) {
                    (None, true) => false,
                    (None, false) => true,
                    (Some(_), true) => true,
                    (Some(o), false) => *o != rec.snaps[0],
                }
            })
            .collect();
        changed.sort_by_key(|(s, _)| *s);
        let mut vanishing = vanishing;
        let mut pending = pending;
        let mut round = 0u32;
        let cap = 2 * self.sites.len() as u32 + 1024;
        while !changed.is_empty() || !pending.is_empty() || !vanishing.is_empty() {
            changed = self.process_round(round, changed, &mut pending, &mut vanishing);
            round += 1;
            assert!(round < cap, "contraction did not converge after {round} rounds");
        }
        self.flush_batch();
    }

    fn process_round(
        &mut self,
        r: u32,
        changed: Changed,
        pending: &mut std::collections::BTreeSet<Site>,
        vanishing: &mut Vec<VanishRec>,
    ) -> Changed {
        let ri = r as usize;
        // Entries whose site is gone or whose death round already passed
        // can never fire; the death processing that made them stale already
        // rebuilt from fresh state.
        pending.retain(|&s| {
            !self.sites[s as usize].tomb && self.sites[s as usize].snaps.len() > ri
        });

        // Dilate the changed set over both old and new adjacency. Decisions
        // read only one-hop state; two hops gives comfortable slack.
        let mut seen: Vec<Site> = changed.iter().map(|(s, _)| *s).collect();
        let mut frontier = seen.clone();
        for _ in 0..2 {
            let mut next = Vec::new();
            for &s in &frontier {
                if let Some(old) = lookup(&changed, s) {
                    if let Some(adj) = old {
                        next.extend(adj.iter().map(|e| e.to));
                    }
                }
                if self.site_alive_at(s, r) {
                    next.extend(self.sites[s as usize].snaps[ri].iter().map(|e| e.to));
                }
            }
            next.sort_unstable();
            next.dedup();
            next.retain(|s| seen.binary_search(s).is_err());
            seen.extend(next.iter().copied());
            seen.sort_unstable();
            frontier = next;
        }
        let recompute: Vec<Site> =
            seen.iter().copied().filter(|&s| self.site_alive_at(s, r)).collect();

        // Fresh decisions for the recompute set.
        let decisions: Vec<(Site, Act)> =
            recompute.iter().map(|&s| (s, self.decide(s, r))).collect();
        let decided = |s: Site| -> Option<Act> {
            decisions.binary_search_by_key(&s, |(site, _)| *site).ok().map(|i| decisions[i].1)
        };
        let act_of = |forest: &RcForest, s: Site| -> Act {
            if let Some(a) = decided(s) {
                return a;
            }
            let rec = &forest.sites[s as usize];
            if rec.snaps.len() == ri + 1 {
                match rec.fate.expect("undecided stored site").kind {
                    FateKind::Raked { into } => Act::Rake { into },
                    FateKind::Compressed => Act::Compress,
                    FateKind::Finalized => Act::Finalize,
                }
            } else {
                Act::Survive
            }
        };

        // Sites whose clusters must be (re)examined this round: recompute
        // sites that die now plus pending rebuilds whose death is now.
        let mut diers: Vec<(Site, Act)> =
            decisions.iter().copied().filter(|(_, a)| *a != Act::Survive).collect();
        let fired: Vec<Site> = pending
            .iter()
            .copied()
            .filter(|&s| {
                self.site_alive_at(s, r)
                    && self.sites[s as usize].snaps.len() == ri + 1
                    && decided(s).is_none()
            })
            .collect();
        for s in fired {
            diers.push((s, act_of(self, s)));
        }
        diers.sort_by_key(|(s, _)| *s);
        diers.dedup_by_key(|(s, _)| *s);

        for &(s, act) in &diers {
            pending.remove(&s);
            self.apply_death(s, r, act, pending, vanishing);
        }

        // Survivors whose next-round state may differ: everything near the
        // recompute set or a fired rebuild.
        let mut active: Vec<Site> = recompute.clone();
        active.extend(diers.iter().map(|(s, _)| *s));
        active.sort_unstable();
        active.dedup();
        let mut w: Vec<Site> = Vec::new();
        for &s in &active {
            if self.site_alive_at(s, r) {
                w.push(s);
                w.extend(self.sites[s as usize].snaps[ri].iter().map(|e| e.to));
            }
        }
        w.sort_unstable();
        w.dedup();
        w.retain(|&s| self.site_alive_at(s, r) && act_of(self, s) == Act::Survive);

        // Read phase: compute next-round adjacency for every candidate.
        let mut writes: Vec<(Site, Adj, Option<Adj>)> = Vec::with_capacity(w.len());
        for &s in &w {
            let mut next = Adj::new();
            for e in &self.sites[s as usize].snaps[ri] {
                match act_of(self, e.to) {
                    Act::Survive => next.push(*e),
                    Act::Rake { into } => debug_assert_eq!(into, s),
                    Act::Compress => {
                        let yadj = &self.sites[e.to as usize].snaps[ri];
                        debug_assert_eq!(yadj.len(), 2);
                        let other = if yadj[0].to == s { yadj[1].to } else { yadj[0].to };
                        let cluster = self.sites[e.to as usize]
                            .fate
                            .expect("compressed site without fate")
                            .cluster;
                        next.push(AdjEntry { to: other, cluster });
                    }
                    Act::Finalize => unreachable!("finalizing site had an edge"),
                }
            }
            next.sort_by_key(|e| e.to);
            debug_assert!(next.windows(2).all(|p| p[0].to < p[1].to));
            let old_next = self.sites[s as usize].snaps.get(ri + 1).cloned();
            if old_next.as_ref() != Some(&next) {
                writes.push((s, next, old_next));
            }
        }

        // Write phase.
        let mut changed_next: Changed = Vec::with_capacity(writes.len());
        for (s, next, old_next) in writes {
            if old_next.is_some() {
                self.sites[s as usize].snaps[ri + 1] = next;
            } else {
                // Life extension: the stored death at this round is void.
                if let Some(f) = self.sites[s as usize].fate.take() {
                    debug_assert_eq!(self.sites[s as usize].snaps.len(), ri + 1);
                    if let FateKind::Raked { into } = f.kind {
                        if !self.sites[into as usize].tomb {
                            pending.insert(into);
                        }
                    }
                    self.retire_cluster(f.cluster);
                }
                self.sites[s as usize].snaps.push(next);
            }
            changed_next.push((s, old_next));
        }

        for rec in vanishing.iter_mut() {
            changed_next.push((rec.site, Some(rec.tail[rec.cursor].clone())));
            rec.cursor += 1;
        }
        vanishing.retain(|rec| rec.cursor < rec.tail.len());

        changed_next.sort_by_key(|(s, _)| *s);
        debug_assert!(changed_next.windows(2).all(|p| p[0].0 < p[1].0));
        changed_next
    }

    fn decide(&self, s: Site, r: u32) -> Act {
        let ri = r as usize;
        let adj = &self.sites[s as usize].snaps[ri];
        let deg = |x: Site| self.sites[x as usize].snaps[ri].len();
        match adj.len() {
            0 => Act::Finalize,
            1 => {
                let y = adj[0].to;
                if deg(y) == 1 {
                    // Adjacent leaves: the smaller uid rakes, the other waits.
                    if self.sites[s as usize].uid < self.sites[y as usize].uid {
                        Act::Rake { into: y }
                    } else {
                        Act::Survive
                    }
                } else {
                    Act::Rake { into: y }
                }
            }
            2 => {
                let y1 = adj[0].to;
                let y2 = adj[1].to;
                if deg(y1) >= 2
                    && deg(y2) >= 2
                    && self.site_coin(s, r)
                    && !(deg(y1) == 2 && self.site_coin(y1, r))
                    && !(deg(y2) == 2 && self.site_coin(y2, r))
                {
                    Act::Compress
                } else {
                    Act::Survive
                }
            }
            _ => Act::Survive,
        }
    }

    /// Forms (or keeps) the cluster for a site dying at round `r`.
    fn apply_death(
        &mut self,
        s: Site,
        r: u32,
        act: Act,
        pending: &mut std::collections::BTreeSet<Site>,
        vanishing: &mut Vec<VanishRec>,
    ) {
        let ri = r as usize;
        let old_len = self.sites[s as usize].snaps.len();
        debug_assert!(old_len > ri);
        if old_len > ri + 1 {
            let tail = self.sites[s as usize].snaps[ri + 1..].to_vec();
            vanishing.push(VanishRec::new(s, tail));
        }

        let adj = self.sites[s as usize].snaps[ri].clone();
        let mut kids: ArrayVec<_, 4> = ArrayVec::new();
        kids.push(self.sites[s as usize].leaf);
        let kind = match act {
            Act::Finalize => {
                debug_assert!(adj.is_empty());
                ClusterKind::Nullary
            }
            Act::Rake { into } => {
                debug_assert_eq!(adj.len(), 1);
                debug_assert_eq!(adj[0].to, into);
                kids.push(adj[0].cluster);
                ClusterKind::Unary { boundary: into }
            }
            Act::Compress => {
                debug_assert_eq!(adj.len(), 2);
                kids.push(adj[0].cluster);
                kids.push(adj[1].cluster);
                let pm = pathmax_merge(
                    self.clusters.get(adj[0].cluster).path_max(),
                    self.clusters.get(adj[1].cluster).path_max(),
                );
                ClusterKind::Binary { bounds: [adj[0].to, adj[1].to], pathmax: pm }
            }
            Act::Survive => unreachable!(),
        };
        // Rake clusters attached over the site's lifetime, in (round,
        // adjacency) order. Round `r` itself is excluded: no neighbor can
        // rake into a site dying this round (the rake rules forbid it), and
        // a neighbor's stored fate at round `r` may be stale until the
        // survivor pass below re-decides it.
        for rho in 0..ri {
            let entries = self.sites[s as usize].snaps[rho].clone();
            for e in entries {
                let yrec = &self.sites[e.to as usize];
                if yrec.tomb || yrec.snaps.len() != rho + 1 {
                    continue;
                }
                if let Some(f) = yrec.fate {
                    if f.kind == (FateKind::Raked { into: s }) {
                        kids.push(f.cluster);
                    }
                }
            }
        }

        let stored = self.sites[s as usize].fate.take();
        let mut kept = None;
        if let Some(f) = stored {
            let stored_death = old_len - 1;
            let node = self.clusters.get(f.cluster);
            if stored_death == ri && node.kind == kind && node.kids == kids {
                kept = Some(f.cluster);
            } else {
                if let FateKind::Raked { into } = f.kind {
                    if !self.sites[into as usize].tomb {
                        pending.insert(into);
                    }
                }
                self.retire_cluster(f.cluster);
            }
        }
        let cid = match kept {
            Some(c) => c,
            None => {
                let is_root = matches!(kind, ClusterKind::Nullary);
                let c = self.clusters.alloc(kind, s, r, kids.clone());
                for k in &kids {
                    self.clusters.get_mut(*k).parent = Some(c);
                }
                if is_root {
                    self.roots.insert(c);
                }
                if let Act::Rake { into } = act {
                    // The absorber has to pick up the fresh id when it dies.
                    pending.insert(into);
                }
                c
            }
        };
        let fate_kind = match act {
            Act::Rake { into } => FateKind::Raked { into },
            Act::Compress => FateKind::Compressed,
            Act::Finalize => FateKind::Finalized,
            Act::Survive => unreachable!(),
        };
        let rec = &mut self.sites[s as usize];
        rec.fate = Some(Fate { kind: fate_kind, cluster: cid });
        rec.snaps.truncate(ri + 1);
    }
}
