//! Brute-force study of the relaxed routing polyhedron on tiny instances.
//!
//! Every integer point of the relaxation (flow balance, one unit per source,
//! each service arc covered at least once, integer arc values) is one cascade
//! walk through all agents plus a non-negative combination of directed cycles
//! inside layers: inter-layer arcs only climb, so any cycle avoiding the
//! sources stays in one layer. The cloud therefore stores the cascade walks
//! that are simple inside every layer as points, and intra-layer cycles as
//! rays. Dimensions are exact ranks over the rationals.

mod family;
mod rank;

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

pub use family::{construct_lemma1_family, FamilyError};
pub use rank::{rank_of, RankAccumulator};

use crate::graph::{Instance, VertexId};
use crate::replicated::ReplicatedGraph;
use crate::separation::Cut;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumConfig {
    /// Largest value any arc may take in an enumerated point.
    pub cap: u8,
    /// Refuse graphs with more replicated arcs than this.
    pub arc_limit: usize,
    /// Refuse to produce more points than this.
    pub point_limit: usize,
    /// Also add every point plus one intra-layer cycle that stays within the cap.
    pub augment: bool,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig { cap: 2, arc_limit: 50, point_limit: 2_000_000, augment: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EnumError {
    #[error("replicated graph has {0} arcs, above the enumeration limit")]
    TooManyArcs(usize),
    #[error("more than {0} points")]
    TooManyPoints(usize),
}

/// Integer points and recession directions of the relaxed polyhedron.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PointCloud {
    /// Sorted, distinct points.
    pub points: Vec<Vec<u8>>,
    /// Independent intra-layer cycles spanning the recession cone's span.
    pub rays: Vec<Vec<u8>>,
    /// Every simple intra-layer cycle.
    pub cycles: Vec<Vec<u8>>,
    pub cap: u8,
}

pub fn enumerate_cgf_points(inst: &Instance, rg: &ReplicatedGraph, cfg: EnumConfig) -> Result<PointCloud, EnumError> {
    if rg.arc_count() > cfg.arc_limit {
        return Err(EnumError::TooManyArcs(rg.arc_count()));
    }
    let n_services = rg.services().len();
    let full: u64 = if n_services >= 64 { u64::MAX } else { (1u64 << n_services) - 1 };
    let walks: Vec<Vec<(Vec<usize>, u64)>> = (0..rg.num_agents()).map(|k| agent_walks(inst, rg, k)).collect();

    let mut points: BTreeSet<Vec<u8>> = BTreeSet::new();
    let mut pick = vec![0usize; walks.len()];
    'outer: loop {
        let mask = pick.iter().enumerate().fold(0u64, |m, (k, &i)| m | walks[k][i].1);
        if mask == full {
            let mut p = vec![0u8; rg.arc_count()];
            for (k, &i) in pick.iter().enumerate() {
                for &a in &walks[k][i].0 {
                    p[a] += 1;
                }
                p[rg.sink_source(k)] = 1;
            }
            if p.iter().all(|&v| v <= cfg.cap) {
                points.insert(p);
                if points.len() > cfg.point_limit {
                    return Err(EnumError::TooManyPoints(cfg.point_limit));
                }
            }
        }
        for k in 0..pick.len() {
            pick[k] += 1;
            if pick[k] < walks[k].len() {
                continue 'outer;
            }
            pick[k] = 0;
        }
        break;
    }

    let cycles = layer_cycles(inst, rg);
    let mut acc = RankAccumulator::new();
    let rays: Vec<Vec<u8>> = cycles.iter().filter(|c| acc.push(&widen(c))).cloned().collect();

    if cfg.augment {
        let base: Vec<Vec<u8>> = points.iter().cloned().collect();
        for p in &base {
            for c in &cycles {
                let q: Vec<u8> = p.iter().zip(c).map(|(a, b)| a + b).collect();
                if q.iter().all(|&v| v <= cfg.cap) {
                    points.insert(q);
                }
            }
            if points.len() > cfg.point_limit {
                return Err(EnumError::TooManyPoints(cfg.point_limit));
            }
        }
    }
    Ok(PointCloud { points: points.into_iter().collect(), rays, cycles, cap: cfg.cap })
}

fn widen(v: &[u8]) -> Vec<i64> {
    v.iter().map(|&a| a as i64).collect()
}

fn difference(p: &[u8], q: &[u8]) -> Vec<i64> {
    p.iter().zip(q).map(|(&a, &b)| a as i64 - b as i64).collect()
}

/// Cascade walks of one agent, each with the set of services it covers.
fn agent_walks(inst: &Instance, rg: &ReplicatedGraph, k: usize) -> Vec<(Vec<usize>, u64)> {
    let mut out = vec![(vec![rg.source_sink(k)], 0u64)];
    let depot = rg.depot();
    let mut walk = vec![rg.source_depot(k)];
    let mut visited = vec![false; inst.graph.vertex_count()];
    visited[depot.0] = true;
    extend_walk(inst, rg, k, 1, depot, &mut visited, &mut walk, 0, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn extend_walk(
    inst: &Instance,
    rg: &ReplicatedGraph,
    k: usize,
    layer: usize,
    v: VertexId,
    visited: &mut Vec<bool>,
    walk: &mut Vec<usize>,
    mask: u64,
    out: &mut Vec<(Vec<usize>, u64)>,
) {
    let g = &inst.graph;
    if v == rg.depot() && layer >= 2 {
        walk.push(rg.depot_sink(k, layer));
        out.push((walk.clone(), mask));
        walk.pop();
    }
    if layer < rg.num_layers() {
        for (s, &base) in rg.services().iter().enumerate() {
            let arc = g.arc(base);
            if arc.tail != v {
                continue;
            }
            let mut fresh = vec![false; g.vertex_count()];
            fresh[arc.head.0] = true;
            walk.push(rg.copy(s, k, layer));
            extend_walk(inst, rg, k, layer + 1, arc.head, &mut fresh, walk, mask | (1 << s), out);
            walk.pop();
        }
    }
    for d in g.deadhead_out(v) {
        let h = g.arc(d).head;
        if visited[h.0] {
            continue;
        }
        visited[h.0] = true;
        walk.push(rg.intra(rg.deadhead_index(d).expect("deadhead"), k, layer));
        extend_walk(inst, rg, k, layer, h, visited, walk, mask, out);
        walk.pop();
        visited[h.0] = false;
    }
}

/// Simple directed cycles of the deadhead graph as base arc lists, each
/// listed once starting from its smallest vertex.
pub fn base_cycles(inst: &Instance) -> Vec<Vec<usize>> {
    let g = &inst.graph;
    let n = g.vertex_count();
    let mut out = Vec::new();
    for start in 0..n {
        let mut on = vec![false; n];
        let mut path = Vec::new();
        fn dfs(
            inst: &Instance,
            start: usize,
            v: usize,
            on: &mut [bool],
            path: &mut Vec<usize>,
            out: &mut Vec<Vec<usize>>,
        ) {
            on[v] = true;
            for d in inst.graph.deadhead_out(VertexId(v)) {
                let h = inst.graph.arc(d).head.0;
                if h == start {
                    path.push(d.0);
                    out.push(path.clone());
                    path.pop();
                } else if h > start && !on[h] {
                    path.push(d.0);
                    dfs(inst, start, h, on, path, out);
                    path.pop();
                }
            }
            on[v] = false;
        }
        dfs(inst, start, start, &mut on, &mut path, &mut out);
    }
    out
}

/// Every base cycle copied into every layer of every agent.
fn layer_cycles(inst: &Instance, rg: &ReplicatedGraph) -> Vec<Vec<u8>> {
    let base = base_cycles(inst);
    let mut out = Vec::new();
    for k in 0..rg.num_agents() {
        for l in 1..=rg.num_layers() {
            for c in &base {
                let mut r = vec![0u8; rg.arc_count()];
                for &a in c {
                    let d = rg.deadhead_index(crate::graph::ArcId(a)).expect("deadhead");
                    r[rg.intra(d, k, l)] = 1;
                }
                out.push(r);
            }
        }
    }
    out
}

/// Affine dimension of the cloud: rank of point differences and rays.
pub fn affine_dimension(cloud: &PointCloud) -> usize {
    let Some(p0) = cloud.points.first() else {
        return 0;
    };
    let mut acc = RankAccumulator::new();
    for p in &cloud.points[1..] {
        acc.push(&difference(p, p0));
    }
    for r in &cloud.rays {
        acc.push(&widen(r));
    }
    acc.rank()
}

/// Affine rank of a list of points (no rays).
pub fn affine_rank(points: &[Vec<u8>]) -> usize {
    let Some(p0) = points.first() else {
        return 0;
    };
    let mut acc = RankAccumulator::new();
    for p in &points[1..] {
        acc.push(&difference(p, p0));
    }
    acc.rank()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacetReport {
    pub valid: bool,
    /// Dimension of the face the cut defines; `None` when no point is tight.
    pub tight_dim: Option<usize>,
    pub dim: usize,
    pub facet: bool,
    /// A point violating the cut, if any.
    pub witness: Option<Vec<u8>>,
}

/// Validity and face dimension of a cut over an enumerated cloud.
pub fn verify_facet(cut: &Cut, cloud: &PointCloud) -> FacetReport {
    let dim = affine_dimension(cloud);
    let witness = crate::separation::check_cut_validity(cut, cloud).err();
    let valid = witness.is_none();
    let tight: Vec<&Vec<u8>> = cloud.points.iter().filter(|p| cut.lhs_int(p) == cut.rhs).collect();
    let tight_dim = tight.first().map(|p0| {
        let mut acc = RankAccumulator::new();
        for p in &tight[1..] {
            if acc.rank() >= dim {
                break;
            }
            acc.push(&difference(p, p0));
        }
        for c in cloud.cycles.iter().filter(|c| cut.lhs_int(c) == 0) {
            if acc.rank() >= dim {
                break;
            }
            acc.push(&widen(c));
        }
        acc.rank()
    });
    let facet = valid && dim > 0 && tight_dim == Some(dim - 1);
    FacetReport { valid, tight_dim, dim, facet, witness }
}

/// Rank of the flow-balance and source rows over all replicated arcs.
pub fn equality_rank(rg: &ReplicatedGraph) -> usize {
    let mut acc = RankAccumulator::new();
    for v in 0..rg.vertex_count() {
        let mut row = vec![0i64; rg.arc_count()];
        for &a in rg.out_arcs(v) {
            row[a] += 1;
        }
        for &a in rg.in_arcs(v) {
            row[a] -= 1;
        }
        acc.push(&row);
    }
    for k in 0..rg.num_agents() {
        let mut row = vec![0i64; rg.arc_count()];
        for &a in rg.out_arcs(rg.source(k)) {
            row[a] = 1;
        }
        acc.push(&row);
    }
    acc.rank()
}
