//! Separation on a hand-built fractional point: one agent serves arc 2→3 twice
//! (linked by the reverse deadhead) on half of its flow and the other service
//! twice on the other half.

use std::collections::BTreeSet;

use rpptu_core::graph::{RawArc, RawInstance};
use rpptu_core::polyhedra::{enumerate_cgf_points, verify_facet, EnumConfig};
use rpptu_core::separation::{check_cut_validity, find_cuts, side_conditions, CutPool};
use rpptu_core::spatial::{assemble, GammaRows, NodeFixings};
use rpptu_core::{Instance, ReplicatedGraph};

pub fn two_copy_instance(num_agents: usize) -> Instance {
    let arcs = [
        ("q", "2", "3", 2, true),
        ("r", "4", "1", 1, true),
        ("d12", "1", "2", 1, false),
        ("d21", "2", "1", 1, false),
        ("d32", "3", "2", 1, false),
        ("d23", "2", "3", 2, false),
        ("d34", "3", "4", 1, false),
        ("d41", "4", "1", 1, false),
        ("d14", "1", "4", 1, false),
        ("d13", "1", "3", 3, false),
    ];
    let raw = RawInstance {
        name: "two-copy".into(),
        num_agents,
        horizon: 0,
        depot: "1".into(),
        vertices: ["1", "2", "3", "4"].map(String::from).to_vec(),
        arcs: arcs.iter().map(|&(id, t, h, w, s)| RawArc::new(id, t, h, w, s)).collect(),
        windows: Default::default(),
    };
    Instance::from_raw(&raw).unwrap()
}

/// The fractional point together with the replicated ids of the two copies
/// and the linking deadhead.
fn half_point(inst: &Instance, rg: &ReplicatedGraph) -> (Vec<f64>, [usize; 3]) {
    let g = &inst.graph;
    let svc = |name: &str| rg.service_index(g.arc_by_name(name).unwrap()).unwrap();
    let dh = |name: &str, layer: usize| rg.intra(rg.deadhead_index(g.arc_by_name(name).unwrap()).unwrap(), 0, layer);
    let (q, r) = (svc("q"), svc("r"));
    let link = dh("d32", 2);
    let first = [
        rg.source_depot(0),
        dh("d12", 1),
        rg.copy(q, 0, 1),
        link,
        rg.copy(q, 0, 2),
        dh("d34", 3),
        dh("d41", 3),
        rg.depot_sink(0, 3),
        rg.sink_source(0),
    ];
    let second = [
        rg.source_depot(0),
        dh("d14", 1),
        rg.copy(r, 0, 1),
        dh("d14", 2),
        rg.copy(r, 0, 2),
        rg.depot_sink(0, 3),
        rg.sink_source(0),
    ];
    let mut x = vec![0.0; rg.arc_count()];
    for a in first.into_iter().chain(second) {
        x[a] += 0.5;
    }
    for k in 1..rg.num_agents() {
        x[rg.source_sink(k)] = 1.0;
        x[rg.sink_source(k)] = 1.0;
    }
    (x, [rg.copy(q, 0, 1), link, rg.copy(q, 0, 2)])
}

#[test]
fn half_point_is_lp_feasible() {
    let inst = two_copy_instance(2);
    let rg = ReplicatedGraph::build(&inst);
    let (mut x, _) = half_point(&inst, &rg);
    let lp = assemble(&rg, &NodeFixings::root(&rg), &[], GammaRows::PerAgent).unwrap();
    x.push(1000.0);
    assert!(lp.problem.max_violation(&x) < 1e-12);
}

#[test]
fn half_point_yields_cut_at_one_half() {
    let inst = two_copy_instance(2);
    let rg = ReplicatedGraph::build(&inst);
    let (x, path) = half_point(&inst, &rg);
    let cuts = find_cuts(&rg, &x, &CutPool::new());
    let expected: BTreeSet<usize> = path.iter().flat_map(|&a| [rg.arc(a).tail, rg.arc(a).head]).collect();
    let cut = cuts
        .iter()
        .find(|c| c.origin.as_ref().is_some_and(|o| o.set.iter().copied().collect::<BTreeSet<_>>() == expected))
        .expect("cut around the linking path");
    assert_eq!(cut.lhs(&x), 0.5);
    assert_eq!(cut.rhs, 1);
    let origin = cut.origin.as_ref().unwrap();
    assert_eq!(origin.path, vec![path[1]]);
    assert!(side_conditions(&rg, origin.service, &expected));
}

#[test]
fn pooled_cut_is_not_reported_again() {
    let inst = two_copy_instance(2);
    let rg = ReplicatedGraph::build(&inst);
    let (x, _) = half_point(&inst, &rg);
    let mut pool = CutPool::new();
    for c in find_cuts(&rg, &x, &pool) {
        assert!(pool.add(c));
    }
    assert!(!pool.is_empty());
    assert!(find_cuts(&rg, &x, &pool).is_empty());
}

#[test]
fn integral_point_yields_no_cut() {
    let inst = two_copy_instance(2);
    let rg = ReplicatedGraph::build(&inst);
    let (x, _) = half_point(&inst, &rg);
    let doubled: Vec<f64> = x.iter().map(|v| (2.0 * v).min(1.0)).collect();
    assert!(find_cuts(&rg, &doubled, &CutPool::new()).is_empty());
}

/// Boundary arcs of `set` at the first copy's tail (exits) and the last
/// copy's head (entries) that do not belong to the linking path.
fn stranded_boundary(rg: &ReplicatedGraph, path: &[usize; 3], set: &BTreeSet<usize>) -> Vec<usize> {
    let (tail, head) = (rg.arc(path[0]).tail, rg.arc(path[2]).head);
    let mut out: Vec<usize> = rg
        .out_arcs(tail)
        .iter()
        .chain(rg.in_arcs(head))
        .copied()
        .filter(|&a| !path.contains(&a) && set.contains(&rg.arc(a).tail) != set.contains(&rg.arc(a).head))
        .collect();
    out.sort_unstable();
    out
}

#[test]
fn cut_is_valid_but_face_loses_stranded_arcs() {
    let inst = two_copy_instance(2);
    let rg = ReplicatedGraph::build(&inst);
    let (x, path) = half_point(&inst, &rg);
    let cloud = enumerate_cgf_points(&inst, &rg, EnumConfig { arc_limit: 80, ..EnumConfig::default() }).unwrap();
    let set: BTreeSet<usize> = path.iter().flat_map(|&a| [rg.arc(a).tail, rg.arc(a).head]).collect();
    let cut = find_cuts(&rg, &x, &CutPool::new())
        .into_iter()
        .find(|c| c.origin.as_ref().is_some_and(|o| o.set.iter().copied().collect::<BTreeSet<_>>() == set))
        .unwrap();
    assert_eq!(check_cut_validity(&cut, &cloud), Ok(()));

    // Leaving S before serving, or entering it after the last copy, costs a
    // second crossing, so these arcs vanish on the face.
    let stranded = stranded_boundary(&rg, &path, &set);
    assert_eq!(stranded.len(), 4);
    for p in cloud.points.iter().filter(|p| cut.lhs_int(p) == cut.rhs) {
        assert!(stranded.iter().all(|&a| p[a] == 0));
    }
    let report = verify_facet(&cut, &cloud);
    assert_eq!(report.dim, rg.arc_count() - rg.vertex_count());
    assert_eq!(report.tight_dim, Some(report.dim - 1 - stranded.len()));
    assert!(report.valid && !report.facet);
}
