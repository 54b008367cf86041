//! An explicit set of `|𝒜| − |𝒱| + 1` affinely independent integer points.
//!
//! Built from a base tour in which agent 0 serves every service arc once, in
//! index order, one per layer, while the other agents stay idle:
//!
//! 1. the base tour;
//! 2. for every copy owned by agents `1..K`: the base tour plus that agent
//!    serving the copy's arc in every layer up to the copy's layer;
//! 3. the mirrored base tour with agent 1 serving and agent 0 idle;
//! 4. for every agent-0 copy not on the base tour: the mirrored tour plus
//!    agent 0 on the base pattern with that copy swapped in;
//! 5. for every agent-0 depot exit at layers `2..L-1`: the mirrored tour plus
//!    agent 0 on the base pattern cut short at that layer;
//! 6. the base tour plus each of a basis of intra-layer cycles.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::{base_cycles, RankAccumulator};
use crate::graph::{ArcId, Instance, VertexId};
use crate::replicated::ReplicatedGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FamilyError {
    #[error("the construction needs at least two agents")]
    TooFewAgents,
}

pub fn construct_lemma1_family(inst: &Instance, rg: &ReplicatedGraph) -> Result<Vec<Vec<u8>>, FamilyError> {
    let agents = rg.num_agents();
    if agents < 2 {
        return Err(FamilyError::TooFewAgents);
    }
    let n = rg.services().len();
    let pattern: Vec<usize> = (0..n).collect();
    let idle = |x: &mut Vec<u8>, k: usize| x[rg.source_sink(k)] = 1;
    let cascade = |x: &mut Vec<u8>| {
        for k in 0..agents {
            x[rg.sink_source(k)] = 1;
        }
    };
    let tour = |serving: usize| {
        let mut x = vec![0u8; rg.arc_count()];
        cascade(&mut x);
        for k in 0..agents {
            if k == serving {
                add_walk(inst, rg, &mut x, k, &pattern);
            } else {
                idle(&mut x, k);
            }
        }
        x
    };
    let base = tour(0);
    let mirrored = tour(1);
    let mut family = vec![base.clone()];

    for k in 1..agents {
        for s in 0..n {
            for l in 1..=n {
                let mut x = base.clone();
                x[rg.source_sink(k)] = 0;
                add_walk(inst, rg, &mut x, k, &vec![s; l]);
                family.push(x);
            }
        }
    }

    family.push(mirrored.clone());
    for l in 1..=n {
        for s in (0..n).filter(|&s| s != pattern[l - 1]) {
            let mut seq = pattern.clone();
            seq[l - 1] = s;
            let mut x = mirrored.clone();
            x[rg.source_sink(0)] = 0;
            add_walk(inst, rg, &mut x, 0, &seq);
            family.push(x);
        }
    }
    for exit in 2..rg.num_layers() {
        let mut x = mirrored.clone();
        x[rg.source_sink(0)] = 0;
        add_walk(inst, rg, &mut x, 0, &pattern[..exit - 1]);
        family.push(x);
    }

    let cycles = base_cycles(inst);
    for k in 0..agents {
        for l in 1..=rg.num_layers() {
            let mut acc = RankAccumulator::new();
            for c in &cycles {
                let v: Vec<i64> = {
                    let mut v = vec![0i64; inst.graph.arc_count()];
                    for &a in c {
                        v[a] = 1;
                    }
                    v
                };
                if !acc.push(&v) {
                    continue;
                }
                let mut x = base.clone();
                for &a in c {
                    x[rg.intra(rg.deadhead_index(ArcId(a)).expect("deadhead"), k, l)] += 1;
                }
                family.push(x);
            }
        }
    }
    Ok(family)
}

/// Adds agent `k` serving `seq` (service indices) one per layer from the
/// depot, joined by fewest-arc deadhead paths, then leaving at the depot.
fn add_walk(inst: &Instance, rg: &ReplicatedGraph, x: &mut [u8], k: usize, seq: &[usize]) {
    let g = &inst.graph;
    x[rg.source_depot(k)] += 1;
    let mut at = g.depot();
    for (i, &s) in seq.iter().enumerate() {
        let layer = i + 1;
        let arc = g.arc(rg.services()[s]);
        for d in bfs_path(inst, at, arc.tail) {
            x[rg.intra(rg.deadhead_index(d).expect("deadhead"), k, layer)] += 1;
        }
        x[rg.copy(s, k, layer)] += 1;
        at = arc.head;
    }
    let last = seq.len() + 1;
    for d in bfs_path(inst, at, g.depot()) {
        x[rg.intra(rg.deadhead_index(d).expect("deadhead"), k, last)] += 1;
    }
    x[rg.depot_sink(k, last)] += 1;
}

/// Fewest-arc deadhead path; ties towards smaller arc ids.
fn bfs_path(inst: &Instance, from: VertexId, to: VertexId) -> Vec<ArcId> {
    let g = &inst.graph;
    let mut pred: Vec<Option<ArcId>> = vec![None; g.vertex_count()];
    let mut seen = vec![false; g.vertex_count()];
    let mut queue = VecDeque::from([from]);
    seen[from.0] = true;
    while let Some(v) = queue.pop_front() {
        if v == to {
            break;
        }
        for a in g.deadhead_out(v) {
            let h = g.arc(a).head;
            if !seen[h.0] {
                seen[h.0] = true;
                pred[h.0] = Some(a);
                queue.push_back(h);
            }
        }
    }
    let mut path = Vec::new();
    let mut v = to;
    while v != from {
        let a = pred[v.0].expect("deadhead graph is strongly connected");
        path.push(a);
        v = g.arc(a).tail;
    }
    path.reverse();
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyhedra::affine_rank;
    use crate::replicated::tests::appendix;
    use crate::spatial::{check_feasible_integer, ServiceMode};

    #[test]
    fn appendix_family() {
        let (inst, rg) = appendix();
        let fam = construct_lemma1_family(&inst, &rg).unwrap();
        assert_eq!(fam.len(), 21);
        for p in &fam {
            let x: Vec<i64> = p.iter().map(|&v| v as i64).collect();
            assert_eq!(check_feasible_integer(&rg, &x, ServiceMode::Cgf), Ok(()));
        }
        assert_eq!(affine_rank(&fam), 20);
    }
}
