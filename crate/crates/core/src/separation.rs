//! Cuts for LP points that split one agent's service of an arc across
//! several layers.
//!
//! When two copies of the same service arc in one agent's sub-graph carry
//! fractional flow and the fractional support links the first copy's head to
//! the second copy's tail, the vertex set `S` along that link must be left by
//! at least one unit of flow unless the arc is served outside `S`:
//!
//! `Σ_{δ⁺(S)} x + Σ_{copies of the arc inside 𝒱∖S} x ≥ 1`.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::lp::{EPS_FEAS, EPS_INT};
use crate::polyhedra::PointCloud;
use crate::replicated::{ArcCategory, ReplicatedGraph};

/// Where a cut came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    /// Service index of the split arc.
    pub service: usize,
    pub agent: usize,
    /// Sorted replicated vertex ids.
    pub set: Vec<usize>,
    /// Support arcs linking the two copies.
    pub path: Vec<usize>,
}

/// `Σ_{a ∈ support} x_a ≥ rhs`, all coefficients one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cut {
    /// Sorted, distinct arc ids.
    pub support: Vec<usize>,
    pub rhs: i64,
    pub origin: Option<Provenance>,
}

impl Cut {
    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.support.iter().map(|&a| x[a]).sum()
    }

    pub fn lhs_int<T: Copy + Into<i64>>(&self, x: &[T]) -> i64 {
        self.support.iter().map(|&a| x[a].into()).sum()
    }

    /// Builds the cut for service `service` around vertex set `set`.
    pub fn around(rg: &ReplicatedGraph, service: usize, agent: usize, set: &BTreeSet<usize>, path: Vec<usize>) -> Cut {
        let inside = rg.membership(set);
        let mut support: BTreeSet<usize> = rg.boundary(set).delta_plus.into_iter().collect();
        for a in rg.copies_of(service) {
            let arc = rg.arc(a);
            if !inside[arc.tail] && !inside[arc.head] {
                support.insert(a);
            }
        }
        Cut {
            support: support.into_iter().collect(),
            rhs: 1,
            origin: Some(Provenance { service, agent, set: set.iter().copied().collect(), path }),
        }
    }

    fn signature(&self) -> Option<(usize, Vec<usize>)> {
        self.origin.as_ref().map(|o| (o.service, o.set.clone()))
    }
}

/// All cuts generated in one solve.
#[derive(Clone, Debug, Default)]
pub struct CutPool {
    cuts: Vec<Cut>,
    seen: BTreeSet<(usize, Vec<usize>)>,
}

impl CutPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, cut: &Cut) -> bool {
        cut.signature().is_some_and(|s| self.seen.contains(&s))
    }

    /// Adds the cut unless an identical one is present.
    pub fn add(&mut self, cut: Cut) -> bool {
        if let Some(sig) = cut.signature() {
            if !self.seen.insert(sig) {
                return false;
            }
        }
        self.cuts.push(cut);
        true
    }

    pub fn cuts(&self) -> &[Cut] {
        &self.cuts
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }
}

/// Conditions under which a cut around `set` is emitted: the rest of the
/// graph stays strongly connected, no other service arc's copy touches the
/// set, and every weak component of the arcs touching the set holds a copy
/// of the split arc.
pub fn side_conditions(rg: &ReplicatedGraph, service: usize, set: &BTreeSet<usize>) -> bool {
    if set.is_empty() || set.iter().any(|&v| rg.is_depot_copy(v)) {
        return false;
    }
    let inside = rg.membership(set);
    let outside: Vec<bool> = inside.iter().map(|&b| !b).collect();
    if !rg.is_strongly_connected_on(&outside) {
        return false;
    }
    let touching: Vec<usize> =
        (0..rg.arc_count()).filter(|&a| inside[rg.arc(a).tail] || inside[rg.arc(a).head]).collect();
    let own: BTreeSet<usize> = rg.copies_of(service).into_iter().collect();
    for &a in &touching {
        let arc = rg.arc(a);
        if arc.category == ArcCategory::InterLayer && !own.contains(&a) {
            return false;
        }
    }
    let comps = rg.components_within(&touching);
    comps.iter().all(|comp| {
        let verts: BTreeSet<usize> = comp.iter().copied().collect();
        touching.iter().any(|&a| own.contains(&a) && verts.contains(&rg.arc(a).tail))
    })
}

/// Violated cuts for the LP point `x`, skipping any already in `pool`.
pub fn find_cuts(rg: &ReplicatedGraph, x: &[f64], pool: &CutPool) -> Vec<Cut> {
    let fractional = |v: f64| v > EPS_INT && v < 1.0 - EPS_INT;
    let mut out: Vec<Cut> = Vec::new();
    let mut seen = BTreeSet::new();
    for k in 0..rg.num_agents() {
        for s in 0..rg.services().len() {
            let copies: Vec<usize> =
                (1..rg.num_layers()).map(|l| rg.copy(s, k, l)).filter(|&a| fractional(x[a])).collect();
            if copies.len() < 2 {
                continue;
            }
            for (i, &ci) in copies.iter().enumerate() {
                for &cj in &copies[i + 1..] {
                    let Some(path) = support_path(rg, x, k, rg.arc(ci).head, rg.arc(cj).tail) else {
                        continue;
                    };
                    let mut set = BTreeSet::new();
                    set.insert(rg.arc(ci).tail);
                    set.insert(rg.arc(ci).head);
                    for &a in &path {
                        set.insert(rg.arc(a).head);
                    }
                    set.insert(rg.arc(cj).head);
                    set.retain(|&v| !rg.is_depot_copy(v));
                    if !side_conditions(rg, s, &set) {
                        continue;
                    }
                    let cut = Cut::around(rg, s, k, &set, path);
                    if cut.lhs(x) >= 1.0 - EPS_FEAS || pool.contains(&cut) {
                        continue;
                    }
                    if seen.insert(cut.signature()) {
                        out.push(cut);
                    }
                }
            }
        }
    }
    out
}

/// Shortest path (by arc count) from `from` to `to` over arcs of agent `k`'s
/// layers that carry positive flow. Ties go to the smaller arc id.
fn support_path(rg: &ReplicatedGraph, x: &[f64], k: usize, from: usize, to: usize) -> Option<Vec<usize>> {
    if from == to {
        return Some(Vec::new());
    }
    let mut pred = vec![usize::MAX; rg.vertex_count()];
    let mut seen = vec![false; rg.vertex_count()];
    let mut queue = VecDeque::from([from]);
    seen[from] = true;
    while let Some(v) = queue.pop_front() {
        for &a in rg.out_arcs(v) {
            let arc = rg.arc(a);
            if arc.agent != k || !arc.category.is_real() || x[a] <= EPS_INT || seen[arc.head] {
                continue;
            }
            seen[arc.head] = true;
            pred[arc.head] = a;
            if arc.head == to {
                let mut path = Vec::new();
                let mut w = to;
                while w != from {
                    let a = pred[w];
                    path.push(a);
                    w = rg.arc(a).tail;
                }
                path.reverse();
                return Some(path);
            }
            queue.push_back(arc.head);
        }
    }
    None
}

/// Every enumerated point satisfies the cut, and no ray decreases it.
/// On failure the offending point is returned.
pub fn check_cut_validity(cut: &Cut, cloud: &PointCloud) -> Result<(), Vec<u8>> {
    for p in &cloud.points {
        if cut.lhs_int(p) < cut.rhs {
            return Err(p.clone());
        }
    }
    for r in &cloud.rays {
        if cut.lhs_int(r) < 0 {
            return Err(r.clone());
        }
    }
    Ok(())
}
