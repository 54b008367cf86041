//! Timing of integral routes under arc unavailability.
//!
//! Waiting is free and the earliest-departure map is monotone, so greedy
//! earliest propagation along a fixed walk gives every agent its earliest
//! finish. Movement between services uses deadhead arcs only: the replicated
//! graph copies nothing else inside a layer.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::graph::{ArcId, Instance, Time, VertexId};
use crate::replicated::{ArcCategory, ReplicatedGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Step {
    /// Replicated arc id.
    pub arc: usize,
    pub depart: Time,
    pub arrive: Time,
    /// Time spent at the tail before departing.
    pub wait: Time,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AgentSchedule {
    pub steps: Vec<Step>,
    pub finish: Time,
    pub waiting: Time,
    pub fuel: Time,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trajectory {
    pub agents: Vec<AgentSchedule>,
    /// Latest finish over all agents.
    pub gamma: Time,
}

impl Trajectory {
    pub fn fuel(&self) -> Time {
        self.agents.iter().map(|a| a.fuel).sum()
    }

    pub fn cost(&self) -> Time {
        self.fuel() + self.gamma
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TemporalError {
    #[error("walk branches at replicated vertex {0}")]
    Branching(usize),
    #[error("walk of agent {0} does not reach its sink")]
    Dangling(usize),
    #[error("arc vector has flow off every agent walk")]
    Detached,
    #[error("agent {agent} visits replicated vertex {vertex} twice")]
    Revisit { agent: usize, vertex: usize },
}

/// Splits an integral strict-mode vector into one walk per agent, from the
/// source to the sink (cascade arcs omitted).
pub fn extract_walks(rg: &ReplicatedGraph, x: &[i64]) -> Result<Vec<Vec<usize>>, TemporalError> {
    let mut used = vec![0i64; rg.arc_count()];
    let mut walks = Vec::with_capacity(rg.num_agents());
    for k in 0..rg.num_agents() {
        let mut walk = Vec::new();
        let mut seen = BTreeMap::new();
        let mut v = rg.source(k);
        while v != rg.sink(k) {
            if seen.insert(v, ()).is_some() {
                return Err(TemporalError::Revisit { agent: k, vertex: v });
            }
            let mut next = rg.out_arcs(v).iter().copied().filter(|&a| x[a] > 0);
            let Some(a) = next.next() else {
                return Err(TemporalError::Dangling(k));
            };
            if next.next().is_some() || x[a] > 1 {
                return Err(TemporalError::Branching(v));
            }
            used[a] += 1;
            walk.push(a);
            v = rg.arc(a).head;
        }
        used[rg.sink_source(k)] += 1;
        walks.push(walk);
    }
    if used != x {
        return Err(TemporalError::Detached);
    }
    Ok(walks)
}

/// Earliest-time schedule of an integral solution; every agent starts at 0.
pub fn solve_temporal(inst: &Instance, rg: &ReplicatedGraph, x: &[i64]) -> Result<Trajectory, TemporalError> {
    let walks = extract_walks(rg, x)?;
    let agents: Vec<AgentSchedule> = walks.iter().map(|w| schedule_walk(inst, rg, w)).collect();
    let gamma = agents.iter().map(|a| a.finish).max().unwrap_or(0);
    Ok(Trajectory { agents, gamma })
}

fn schedule_walk(inst: &Instance, rg: &ReplicatedGraph, walk: &[usize]) -> AgentSchedule {
    let mut t = 0;
    let mut out = AgentSchedule::default();
    for &a in walk {
        let arc = rg.arc(a);
        let depart = match arc.base {
            Some(b) => inst.depart(b, t),
            None => t,
        };
        let arrive = depart + arc.weight;
        out.steps.push(Step { arc: a, depart, arrive, wait: depart - t });
        out.waiting += depart - t;
        out.fuel += arc.weight;
        t = arrive;
    }
    // An idle agent never leaves the source.
    if walk.iter().any(|&a| rg.arc(a).category.is_real()) {
        out.finish = t;
    } else {
        out.finish = 0;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FastestPath {
    pub arcs: Vec<ArcId>,
    pub arrive: Time,
    /// Waiting accumulated along the path.
    pub delay: Time,
}

/// Earliest-arrival deadhead path from `from` (reached at `start`) to `to`.
/// Ties resolve towards smaller vertex and arc ids.
pub fn fastest_path(inst: &Instance, from: VertexId, to: VertexId, start: Time) -> Option<FastestPath> {
    let g = &inst.graph;
    let n = g.vertex_count();
    let mut best = vec![Time::MAX; n];
    let mut pred: Vec<Option<ArcId>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    best[from.0] = start;
    heap.push(Reverse((start, from.0)));
    while let Some(Reverse((t, v))) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        if v == to.0 {
            break;
        }
        for a in g.deadhead_out(VertexId(v)) {
            let h = g.arc(a).head.0;
            let arr = inst.traverse(a, t);
            if arr < best[h] {
                best[h] = arr;
                pred[h] = Some(a);
                heap.push(Reverse((arr, h)));
            }
        }
    }
    if !done[to.0] {
        return None;
    }
    let mut arcs = Vec::new();
    let mut v = to.0;
    while v != from.0 {
        let a = pred[v]?;
        arcs.push(a);
        v = g.arc(a).tail.0;
    }
    arcs.reverse();
    let weight: Time = arcs.iter().map(|&a| g.arc(a).weight).sum();
    Some(FastestPath { arcs, arrive: best[to.0], delay: best[to.0] - start - weight })
}

/// One agent's tour in base-graph terms: `legs[i]` are the deadheads before
/// `services[i]`, and the last leg returns to the depot.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct AgentRoute {
    pub services: Vec<ArcId>,
    pub legs: Vec<Vec<ArcId>>,
}

impl AgentRoute {
    pub fn idle() -> Self {
        Self::default()
    }

    pub fn is_idle(&self) -> bool {
        self.services.is_empty()
    }

    /// All base arcs in travel order.
    pub fn arcs(&self) -> Vec<ArcId> {
        let mut out = Vec::new();
        for (i, leg) in self.legs.iter().enumerate() {
            out.extend_from_slice(leg);
            if let Some(&s) = self.services.get(i) {
                out.push(s);
            }
        }
        out
    }
}

/// Strict-mode arc vector for the given per-agent routes.
pub fn routes_to_x(rg: &ReplicatedGraph, routes: &[AgentRoute]) -> Vec<i64> {
    let mut x = vec![0; rg.arc_count()];
    for (k, r) in routes.iter().enumerate() {
        x[rg.sink_source(k)] = 1;
        if r.is_idle() {
            x[rg.source_sink(k)] = 1;
            continue;
        }
        x[rg.source_depot(k)] = 1;
        for (i, leg) in r.legs.iter().enumerate() {
            let layer = i + 1;
            for &d in leg {
                let di = rg.deadhead_index(d).expect("leg uses deadhead arcs");
                x[rg.intra(di, k, layer)] += 1;
            }
            if let Some(&s) = r.services.get(i) {
                let si = rg.service_index(s).expect("service arc");
                x[rg.copy(si, k, layer)] += 1;
            }
        }
        x[rg.depot_sink(k, r.services.len() + 1)] = 1;
    }
    x
}

/// Fuel and finish of a route scheduled from time 0.
pub fn route_timing(inst: &Instance, route: &AgentRoute) -> (Time, Time) {
    let mut t = 0;
    let mut fuel = 0;
    for a in route.arcs() {
        t = inst.traverse(a, t);
        fuel += inst.graph.arc(a).weight;
    }
    (fuel, t)
}

#[derive(Clone, Copy, Debug)]
struct Label {
    vertex: usize,
    time: Time,
    fuel: Time,
    parent: usize,
    /// Base arc taken to reach this label.
    arc: Option<ArcId>,
}

/// Non-dominated (fuel, finish) routes for serving `services` in order from
/// the depot at time 0 and returning to it. Fronts are sorted by finish.
pub fn pareto_routes(inst: &Instance, services: &[ArcId]) -> Vec<(Time, Time, AgentRoute)> {
    if services.is_empty() {
        return vec![(0, 0, AgentRoute::idle())];
    }
    let g = &inst.graph;
    let depot = g.depot().0;
    let mut arena: Vec<Label> = Vec::new();
    let mut frontier = vec![usize::MAX];
    arena.push(Label { vertex: depot, time: 0, fuel: 0, parent: usize::MAX, arc: None });
    frontier[0] = 0;
    for stage in 0..=services.len() {
        let target = match services.get(stage) {
            Some(&s) => g.arc(s).tail.0,
            None => depot,
        };
        let reached = deadhead_front(inst, &mut arena, &frontier, target);
        frontier = match services.get(stage) {
            Some(&s) => reached
                .into_iter()
                .map(|i| {
                    let l = arena[i];
                    let t = inst.traverse(s, l.time);
                    arena.push(Label {
                        vertex: g.arc(s).head.0,
                        time: t,
                        fuel: l.fuel + g.arc(s).weight,
                        parent: i,
                        arc: Some(s),
                    });
                    arena.len() - 1
                })
                .collect(),
            None => reached,
        };
        frontier = prune(&arena, frontier);
    }
    frontier
        .into_iter()
        .map(|i| {
            let l = arena[i];
            (l.fuel, l.time, rebuild(inst, &arena, i, services))
        })
        .collect()
}

/// Keeps labels not dominated in (time, fuel); sorted by time.
fn prune(arena: &[Label], mut ids: Vec<usize>) -> Vec<usize> {
    ids.sort_by_key(|&i| (arena[i].time, arena[i].fuel, i));
    let mut out = Vec::new();
    let mut min_fuel = Time::MAX;
    for i in ids {
        if arena[i].fuel < min_fuel {
            min_fuel = arena[i].fuel;
            out.push(i);
        }
    }
    out
}

/// Bicriteria label setting over deadheads from the labels in `starts`;
/// returns the non-dominated labels at `target`.
fn deadhead_front(inst: &Instance, arena: &mut Vec<Label>, starts: &[usize], target: usize) -> Vec<usize> {
    let g = &inst.graph;
    let mut min_fuel = vec![Time::MAX; g.vertex_count()];
    let mut heap = BinaryHeap::new();
    for &i in starts {
        heap.push(Reverse((arena[i].time, arena[i].fuel, i)));
    }
    let mut at_target = Vec::new();
    while let Some(Reverse((_, fuel, i))) = heap.pop() {
        let l = arena[i];
        if fuel >= min_fuel[l.vertex] {
            continue;
        }
        min_fuel[l.vertex] = fuel;
        if l.vertex == target {
            at_target.push(i);
            // Continuing through the target can only add fuel and time
            // before coming back to it.
            continue;
        }
        for a in g.deadhead_out(VertexId(l.vertex)) {
            let arc = g.arc(a);
            let t = inst.traverse(a, l.time);
            let f = l.fuel + arc.weight;
            if f >= min_fuel[arc.head.0] {
                continue;
            }
            arena.push(Label { vertex: arc.head.0, time: t, fuel: f, parent: i, arc: Some(a) });
            heap.push(Reverse((t, f, arena.len() - 1)));
        }
    }
    at_target
}

fn rebuild(inst: &Instance, arena: &[Label], end: usize, services: &[ArcId]) -> AgentRoute {
    let mut arcs = Vec::new();
    let mut i = end;
    while let Some(a) = arena[i].arc {
        arcs.push(a);
        i = arena[i].parent;
    }
    arcs.reverse();
    let mut route = AgentRoute { services: services.to_vec(), legs: vec![Vec::new()] };
    let mut next = 0;
    for a in arcs {
        if next < services.len() && a == services[next] && inst.graph.arc(a).service {
            next += 1;
            route.legs.push(Vec::new());
        } else {
            route.legs.last_mut().expect("non-empty").push(a);
        }
    }
    route
}

/// Cheapest combination of per-agent fronts under `fuel + max finish`.
/// Each front must be non-empty; returns (cost, chosen index per agent).
pub fn combine_fronts(fronts: &[Vec<(Time, Time)>]) -> Option<(Time, Vec<usize>)> {
    let mut candidates: Vec<Time> = fronts.iter().flatten().map(|&(_, t)| t).collect();
    candidates.sort_unstable();
    candidates.dedup();
    let mut best: Option<(Time, Vec<usize>)> = None;
    for &gamma in &candidates {
        let mut total = gamma;
        let mut pick = Vec::with_capacity(fronts.len());
        let mut ok = true;
        for f in fronts {
            match f.iter().enumerate().filter(|(_, &(_, t))| t <= gamma).min_by_key(|(i, &(fu, _))| (fu, *i)) {
                Some((i, &(fu, _))) => {
                    total += fu;
                    pick.push(i);
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && best.as_ref().is_none_or(|(b, _)| total < *b) {
            best = Some((total, pick));
        }
    }
    best
}

/// Best routes and cost for a fixed assignment of ordered services to agents.
pub fn best_completion(inst: &Instance, orders: &[Vec<ArcId>]) -> Option<(Time, Vec<AgentRoute>)> {
    let fronts: Vec<Vec<(Time, Time, AgentRoute)>> = orders.iter().map(|o| pareto_routes(inst, o)).collect();
    let slim: Vec<Vec<(Time, Time)>> = fronts.iter().map(|f| f.iter().map(|&(fu, t, _)| (fu, t)).collect()).collect();
    let (cost, pick) = combine_fronts(&slim)?;
    let routes = fronts.into_iter().zip(pick).map(|(f, i)| f[i].2.clone()).collect();
    Some((cost, routes))
}

/// Service order of each agent in an integral strict-mode vector.
pub fn service_orders(rg: &ReplicatedGraph, x: &[i64]) -> Vec<Vec<ArcId>> {
    (0..rg.num_agents())
        .map(|k| {
            let mut copies: Vec<(usize, ArcId)> = rg
                .agent_arcs(k)
                .filter(|&a| x[a] > 0 && rg.arc(a).category == ArcCategory::InterLayer)
                .map(|a| (rg.arc(a).layer, rg.arc(a).base.expect("real arc")))
                .collect();
            copies.sort();
            copies.into_iter().map(|(_, b)| b).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{RawArc, RawInstance};
    use crate::replicated::tests::appendix;
    use alloc::collections::BTreeMap;
    use alloc::string::ToString;

    fn line(windows: &[(&str, [Time; 2])]) -> Instance {
        // 1 -> 2 -> 3 -> 1 deadhead cycle plus a service arc 1 -> 2.
        let mut w: BTreeMap<_, Vec<_>> = BTreeMap::new();
        for (a, lh) in windows {
            w.entry(a.to_string()).or_default().push(*lh);
        }
        Instance::from_raw(&RawInstance {
            name: "line".into(),
            num_agents: 1,
            horizon: 50,
            depot: "1".into(),
            vertices: ["1", "2", "3"].iter().map(|s| s.to_string()).collect(),
            arcs: vec![
                RawArc::new("a", "1", "2", 3, false),
                RawArc::new("b", "2", "3", 4, false),
                RawArc::new("c", "3", "1", 2, false),
                RawArc::new("s", "1", "2", 2, true),
            ],
            windows: w,
        })
        .unwrap()
    }

    #[test]
    fn fastest_path_basics() {
        let inst = line(&[]);
        let v = |n: &str| inst.graph.vertex_by_name(n).unwrap();
        let same = fastest_path(&inst, v("2"), v("2"), 5).unwrap();
        assert_eq!((same.arcs.len(), same.arrive, same.delay), (0, 5, 0));
        let p = fastest_path(&inst, v("1"), v("3"), 10).unwrap();
        assert_eq!((p.arrive, p.delay), (17, 0));
    }

    #[test]
    fn fastest_path_waits_out_window() {
        let inst = line(&[("b", [8, 12])]);
        let v = |n: &str| inst.graph.vertex_by_name(n).unwrap();
        // At 2 by time 6; b (W=4) would overlap (8,12) unless it departs by 4.
        let p = fastest_path(&inst, v("2"), v("3"), 6).unwrap();
        assert_eq!((p.arrive, p.delay), (16, 6));
    }

    #[test]
    fn temporal_of_simple_tour() {
        let (inst, rg) = appendix();
        let route = AgentRoute {
            services: vec![inst.graph.arc_by_name("s1").unwrap(), inst.graph.arc_by_name("s2").unwrap()],
            legs: vec![vec![inst.graph.arc_by_name("d1").unwrap()], vec![], vec![]],
        };
        let x = routes_to_x(&rg, &[route.clone(), AgentRoute::idle()]);
        let tr = solve_temporal(&inst, &rg, &x).unwrap();
        assert_eq!(tr.gamma, 11);
        assert_eq!(tr.agents[1].finish, 0);
        assert_eq!(tr.fuel(), 11);
        assert_eq!(route_timing(&inst, &route), (11, 11));
        assert_eq!(service_orders(&rg, &x)[0], route.services);
    }

    #[test]
    fn branching_walk_is_malformed() {
        let (_, rg) = appendix();
        let mut x = crate::spatial::idle_solution(&rg);
        x[rg.source_depot(0)] = 1;
        assert!(extract_walks(&rg, &x).is_err());
    }

    #[test]
    fn pareto_front_trades_fuel_for_time() {
        // Two ways back from 2 to 1: direct (w 9) or via 3 (w 3 + 3).
        let mut w = BTreeMap::new();
        w.insert("b".to_string(), vec![[3, 30]]);
        let inst = Instance::from_raw(&RawInstance {
            name: "pf".into(),
            num_agents: 1,
            horizon: 40,
            depot: "1".into(),
            vertices: ["1", "2", "3"].iter().map(|s| s.to_string()).collect(),
            arcs: vec![
                RawArc::new("a", "1", "2", 1, false),
                RawArc::new("b", "2", "3", 3, false),
                RawArc::new("c", "3", "1", 3, false),
                RawArc::new("d", "2", "1", 9, false),
                RawArc::new("s", "1", "2", 1, true),
            ],
            windows: w,
        })
        .unwrap();
        let s = inst.graph.arc_by_name("s").unwrap();
        let front = pareto_routes(&inst, &[s]);
        let pts: Vec<(Time, Time)> = front.iter().map(|&(f, t, _)| (f, t)).collect();
        // Direct: arrive 1, leave at 1 -> 10 (fuel 10). Via 3: b blocked until 30 -> 36 (fuel 7).
        assert_eq!(pts, vec![(10, 10), (7, 36)]);
        assert_eq!(combine_fronts(&[pts]).unwrap(), (20, vec![0]));
    }
}
