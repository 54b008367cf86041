use std::collections::VecDeque;

use petgraph::algo::kosaraju_scc;
use petgraph::graph::DiGraph;
use proptest::prelude::*;
use proptest::test_runner::FileFailurePersistence;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rpptu_core::gen::{generate, GenConfig};
use rpptu_core::graph::{ArcId, Time, VertexId};
use rpptu_core::lp::{LpProblem, LpSolver, LpStatus, Relation, RevisedSimplex};
use rpptu_core::temporal::fastest_path;
use rpptu_core::{Instance, ReplicatedGraph};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        failure_persistence: Some(Box::new(FileFailurePersistence::WithSource("regressions"))),
        ..ProptestConfig::with_cases(cases)
    }
}

fn instance(seed: u64, vertices: usize, period: Time, margin: Time, agents: usize) -> Instance {
    generate(&GenConfig {
        num_vertices: vertices,
        arc_ratio: 1.6,
        num_services: Some(2.min(vertices)),
        num_agents: agents,
        period,
        window_margin: margin,
        seed,
        ..GenConfig::default()
    })
    .unwrap()
}

/// Last minute at which any window can still block a departure.
fn quiet_after(inst: &Instance) -> Time {
    (0..inst.graph.arc_count()).flat_map(|a| inst.calendar.windows(ArcId(a))).map(|w| w.hi).max().unwrap_or(0)
}

/// Earliest arrival at `to` by walking the time-expanded graph minute by
/// minute: wait one minute, or leave along any unblocked deadhead.
fn brute_arrival(inst: &Instance, from: VertexId, to: VertexId, start: Time) -> Option<Time> {
    let g = &inst.graph;
    let limit = start.max(quiet_after(inst)) + g.arcs().iter().map(|a| a.weight).sum::<Time>() + 1;
    let width = (limit - start + 1) as usize;
    let mut seen = vec![vec![false; width]; g.vertex_count()];
    let mut queue = VecDeque::from([(from.0, start)]);
    seen[from.0][0] = true;
    let mut best: Option<Time> = None;
    while let Some((v, t)) = queue.pop_front() {
        if v == to.0 {
            best = Some(best.map_or(t, |b| b.min(t)));
        }
        let mut push = |w: usize, u: Time| {
            if u <= limit && !seen[w][(u - start) as usize] {
                seen[w][(u - start) as usize] = true;
                queue.push_back((w, u));
            }
        };
        push(v, t + 1);
        for a in g.deadhead_out(VertexId(v)) {
            let arc = g.arc(a);
            if !inst.calendar.is_window_blocked(a, t, arc.weight) {
                push(arc.head.0, t + arc.weight);
            }
        }
    }
    best
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn departures_are_first_free_minute_and_fifo(
        seed in 0u64..10_000,
        period in 8i64..40,
        margin in 0i64..4,
        t1 in 0i64..160,
        dt in 0i64..40,
    ) {
        let inst = instance(seed, 5, period, margin, 1);
        for a in (0..inst.graph.arc_count()).map(ArcId) {
            let w = inst.graph.arc(a).weight;
            let d = inst.depart(a, t1);
            prop_assert!(d >= t1);
            prop_assert!(!inst.calendar.is_window_blocked(a, d, w));
            prop_assert!((t1..d).all(|t| inst.calendar.is_window_blocked(a, t, w)));
            prop_assert!(inst.traverse(a, t1) <= inst.traverse(a, t1 + dt));
        }
    }

    #[test]
    fn fastest_path_matches_time_expanded_search(
        seed in 0u64..10_000,
        vertices in 3usize..7,
        period in 8i64..40,
        start in 0i64..100,
    ) {
        let inst = instance(seed, vertices, period, 1, 1);
        let from = inst.graph.depot();
        for to in (0..vertices).map(VertexId) {
            let fast = fastest_path(&inst, from, to, start);
            prop_assert_eq!(fast.as_ref().map(|p| p.arrive), brute_arrival(&inst, from, to, start));
            if let Some(p) = fast {
                let mut t = start;
                for &a in &p.arcs {
                    t = inst.traverse(a, t);
                }
                prop_assert_eq!(t, p.arrive);
            }
        }
    }

    #[test]
    fn strong_connectivity_agrees_with_petgraph(
        seed in 0u64..10_000,
        mask_seed in any::<u64>(),
        keep in 0.5f64..1.0,
    ) {
        let inst = instance(seed, 4, 30, 0, 2);
        let rg = ReplicatedGraph::build(&inst);
        let mut rng = ChaCha8Rng::seed_from_u64(mask_seed);
        let active: Vec<bool> = (0..rg.vertex_count()).map(|_| rng.gen_bool(keep)).collect();
        let mut g = DiGraph::<(), ()>::new();
        let nodes: Vec<_> = (0..rg.vertex_count()).map(|_| g.add_node(())).collect();
        for a in 0..rg.arc_count() {
            let arc = rg.arc(a);
            if active[arc.tail] && active[arc.head] {
                g.add_edge(nodes[arc.tail], nodes[arc.head], ());
            }
        }
        let comps = kosaraju_scc(&g).into_iter().filter(|c| active[c[0].index()]).count();
        prop_assert_eq!(rg.is_strongly_connected_on(&active), comps <= 1);
    }
}

/// A small LP with every variable boxed in `[0, upper]`.
#[derive(Clone, Debug)]
struct SmallLp {
    cost: Vec<i32>,
    upper: Vec<i32>,
    rows: Vec<(Vec<i32>, Relation, i32)>,
}

impl SmallLp {
    fn problem(&self) -> LpProblem {
        let mut p = LpProblem::new();
        for (&c, &u) in self.cost.iter().zip(&self.upper) {
            p.add_var(c as f64, 0.0, u as f64);
        }
        for (coef, rel, rhs) in &self.rows {
            let terms = coef.iter().enumerate().filter(|(_, &a)| a != 0).map(|(j, &a)| (j, a as f64)).collect();
            p.add_row(terms, *rel, *rhs as f64);
        }
        p
    }
}

fn small_lp() -> impl Strategy<Value = SmallLp> {
    (1usize..=3).prop_flat_map(|n| {
        let relation = prop_oneof![Just(Relation::Le), Just(Relation::Ge), Just(Relation::Eq)];
        (
            prop::collection::vec(-5i32..=5, n),
            prop::collection::vec(1i32..=5, n),
            prop::collection::vec((prop::collection::vec(-3i32..=3, n), relation, -4i32..=8), 0..=3),
        )
            .prop_map(|(cost, upper, rows)| SmallLp { cost, upper, rows })
    })
}

/// Solves the square system `a x = b` by Gaussian elimination; `None` when
/// singular.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                let pivot_row = a[col].clone();
                for (x, p) in a[r].iter_mut().zip(pivot_row).skip(col) {
                    *x -= f * p;
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Optimum over every vertex of the bounded polytope: each choice of `n`
/// constraints taken as equalities, kept when the solution is feasible.
fn vertex_optimum(lp: &SmallLp) -> Option<f64> {
    let n = lp.cost.len();
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for j in 0..n {
        let unit: Vec<f64> = (0..n).map(|i| (i == j) as i32 as f64).collect();
        planes.push((unit.clone(), 0.0));
        planes.push((unit, lp.upper[j] as f64));
    }
    for (coef, _, rhs) in &lp.rows {
        planes.push((coef.iter().map(|&a| a as f64).collect(), *rhs as f64));
    }
    let p = lp.problem();
    let mut best: Option<f64> = None;
    let m = planes.len();
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize != n {
            continue;
        }
        let chosen: Vec<&(Vec<f64>, f64)> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| &planes[i]).collect();
        let Some(x) = solve_square(chosen.iter().map(|p| p.0.clone()).collect(), chosen.iter().map(|p| p.1).collect())
        else {
            continue;
        };
        let in_box = x.iter().zip(&lp.upper).all(|(&v, &u)| v >= -1e-9 && v <= u as f64 + 1e-9);
        if in_box && p.max_violation(&x) <= 1e-9 {
            let obj = p.objective_value(&x);
            best = Some(best.map_or(obj, |b: f64| b.min(obj)));
        }
    }
    best
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn simplex_matches_vertex_enumeration(lp in small_lp()) {
        let res = RevisedSimplex::default().solve(&lp.problem()).unwrap();
        match vertex_optimum(&lp) {
            Some(best) => {
                prop_assert_eq!(res.status, LpStatus::Optimal);
                prop_assert!((res.objective - best).abs() < 1e-7, "{} vs {}", res.objective, best);
            }
            None => prop_assert_eq!(res.status, LpStatus::Infeasible),
        }
    }

    #[test]
    fn warm_start_agrees_with_cold_solve(
        lp in small_lp(),
        var in 0usize..3,
        up in any::<bool>(),
        cut in prop::collection::vec(-2i32..=2, 3),
        cut_rhs in -2i32..=4,
    ) {
        let solver = RevisedSimplex::default();
        let parent = solver.solve(&lp.problem()).unwrap();
        if parent.status != LpStatus::Optimal {
            return Ok(());
        }
        let j = var % lp.cost.len();
        let mut child = lp.problem();
        let v = parent.x[j];
        if up {
            child.set_bounds(j, v.ceil(), lp.upper[j] as f64);
        } else {
            child.set_bounds(j, 0.0, v.floor());
        }
        let terms = cut.iter().take(lp.cost.len()).enumerate().map(|(j, &a)| (j, a as f64)).collect();
        child.add_row(terms, Relation::Ge, cut_rhs as f64);
        let warm = solver.solve_from(&child, parent.basis.as_ref()).unwrap();
        let cold = solver.solve(&child).unwrap();
        prop_assert_eq!(warm.status, cold.status);
        if cold.status == LpStatus::Optimal {
            prop_assert!((warm.objective - cold.objective).abs() < 1e-7);
            prop_assert!(child.max_violation(&warm.x) < 1e-7);
        }
    }
}
