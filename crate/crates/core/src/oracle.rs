//! Exhaustive reference solver for tiny instances.
//!
//! Enumerates every assignment of service arcs to agents, every service order
//! per agent and every simple deadhead path between consecutive services.
//! Each candidate is timed by stepping the departure clock minute by minute
//! until the arc is free. Walks that revisit a vertex between two services are
//! never better than a simple one: the revisit adds fuel, and arriving earlier
//! than the simple path is impossible because waiting in place is free.

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::{ArcId, Instance, Time, VertexId};
use crate::temporal::AgentRoute;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_vertices: usize,
    pub max_services: usize,
    pub max_agents: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_vertices: 6, max_services: 3, max_agents: 2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("instance too large for exhaustive search")]
pub struct TooLarge;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub cost: Time,
    pub routes: Vec<AgentRoute>,
}

pub fn oracle_optimum(inst: &Instance) -> Result<OracleResult, TooLarge> {
    oracle_optimum_with(inst, OracleLimits::default())
}

pub fn oracle_optimum_with(inst: &Instance, limits: OracleLimits) -> Result<OracleResult, TooLarge> {
    let g = &inst.graph;
    let services = g.service_arcs();
    if g.vertex_count() > limits.max_vertices
        || services.len() > limits.max_services
        || inst.num_agents > limits.max_agents
    {
        return Err(TooLarge);
    }
    let k = inst.num_agents;
    let n = services.len();
    let mut best: Option<OracleResult> = None;
    let mut owner = vec![0usize; n];
    loop {
        let per_agent: Vec<Vec<Candidate>> = (0..k)
            .map(|a| {
                let mine: Vec<ArcId> = (0..n).filter(|&i| owner[i] == a).map(|i| services[i]).collect();
                agent_candidates(inst, &mine)
            })
            .collect();
        combine(&per_agent, &mut Vec::new(), &mut best);
        // Next assignment in base-k counting.
        let mut i = 0;
        while i < n {
            owner[i] += 1;
            if owner[i] < k {
                break;
            }
            owner[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    Ok(best.expect("at least one assignment"))
}

#[derive(Clone, Debug)]
struct Candidate {
    fuel: Time,
    finish: Time,
    route: AgentRoute,
}

fn combine(per_agent: &[Vec<Candidate>], chosen: &mut Vec<usize>, best: &mut Option<OracleResult>) {
    let depth = chosen.len();
    if depth == per_agent.len() {
        let picks: Vec<&Candidate> = chosen.iter().enumerate().map(|(a, &i)| &per_agent[a][i]).collect();
        let cost = picks.iter().map(|c| c.fuel).sum::<Time>() + picks.iter().map(|c| c.finish).max().unwrap_or(0);
        let routes: Vec<AgentRoute> = picks.iter().map(|c| c.route.clone()).collect();
        let better = match best {
            None => true,
            Some(b) => (cost, &routes) < (b.cost, &b.routes),
        };
        if better {
            *best = Some(OracleResult { cost, routes });
        }
        return;
    }
    for i in 0..per_agent[depth].len() {
        chosen.push(i);
        combine(per_agent, chosen, best);
        chosen.pop();
    }
}

/// Every (order, path choice) for one agent, reduced to those not beaten in
/// both fuel and finish by another.
fn agent_candidates(inst: &Instance, mine: &[ArcId]) -> Vec<Candidate> {
    if mine.is_empty() {
        return vec![Candidate { fuel: 0, finish: 0, route: AgentRoute::idle() }];
    }
    let mut all = Vec::new();
    let mut order: Vec<ArcId> = mine.to_vec();
    permutations(&mut order, 0, &mut |ord| {
        let mut legs = Vec::new();
        extend_legs(inst, ord, &mut legs, &mut all);
    });
    all.sort_by(|a: &Candidate, b| (a.finish, a.fuel, &a.route).cmp(&(b.finish, b.fuel, &b.route)));
    let mut kept: Vec<Candidate> = Vec::new();
    for c in all {
        if kept.iter().all(|k| k.fuel > c.fuel) {
            kept.push(c);
        }
    }
    kept
}

fn permutations(v: &mut [ArcId], i: usize, f: &mut dyn FnMut(&[ArcId])) {
    if i == v.len() {
        f(v);
        return;
    }
    for j in i..v.len() {
        v.swap(i, j);
        permutations(v, i + 1, f);
        v.swap(i, j);
    }
}

fn extend_legs(inst: &Instance, order: &[ArcId], legs: &mut Vec<Vec<ArcId>>, out: &mut Vec<Candidate>) {
    let g = &inst.graph;
    let stage = legs.len();
    if stage == order.len() + 1 {
        let route = AgentRoute { services: order.to_vec(), legs: legs.clone() };
        let (fuel, finish) = time_route(inst, &route);
        out.push(Candidate { fuel, finish, route });
        return;
    }
    let from = if stage == 0 { g.depot() } else { g.arc(order[stage - 1]).head };
    let to = if stage == order.len() { g.depot() } else { g.arc(order[stage]).tail };
    for path in simple_paths(inst, from, to) {
        legs.push(path);
        extend_legs(inst, order, legs, out);
        legs.pop();
    }
}

/// All simple deadhead paths from `from` to `to`.
pub fn simple_paths(inst: &Instance, from: VertexId, to: VertexId) -> Vec<Vec<ArcId>> {
    let g = &inst.graph;
    let mut out = Vec::new();
    let mut on_path = vec![false; g.vertex_count()];
    let mut path = Vec::new();
    fn dfs(
        inst: &Instance,
        v: VertexId,
        to: VertexId,
        on_path: &mut [bool],
        path: &mut Vec<ArcId>,
        out: &mut Vec<Vec<ArcId>>,
    ) {
        if v == to {
            out.push(path.clone());
            return;
        }
        on_path[v.0] = true;
        for &a in inst.graph.out_arcs(v) {
            let arc = inst.graph.arc(a);
            if arc.service || on_path[arc.head.0] {
                continue;
            }
            path.push(a);
            dfs(inst, arc.head, to, on_path, path, out);
            path.pop();
        }
        on_path[v.0] = false;
    }
    dfs(inst, from, to, &mut on_path, &mut path, &mut out);
    out
}

/// Fuel and finish of a route from time 0, waiting minute by minute.
pub fn time_route(inst: &Instance, route: &AgentRoute) -> (Time, Time) {
    let mut t = 0;
    let mut fuel = 0;
    for (i, leg) in route.legs.iter().enumerate() {
        for &a in leg.iter().chain(route.services.get(i)) {
            let w = inst.graph.arc(a).weight;
            while inst.calendar.is_window_blocked(a, t, w) {
                t += 1;
            }
            t += w;
            fuel += w;
        }
    }
    (fuel, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{RawArc, RawInstance};
    use alloc::collections::BTreeMap;
    use alloc::string::ToString;

    fn cycle(window: Option<[Time; 2]>) -> Instance {
        let mut w = BTreeMap::new();
        if let Some(win) = window {
            w.insert("b".to_string(), vec![win]);
        }
        Instance::from_raw(&RawInstance {
            name: "cycle".into(),
            num_agents: 1,
            horizon: 20,
            depot: "1".into(),
            vertices: ["1", "2", "3"].iter().map(|s| s.to_string()).collect(),
            arcs: vec![
                RawArc::new("a", "1", "2", 1, false),
                RawArc::new("b", "2", "3", 1, false),
                RawArc::new("c", "3", "1", 1, false),
                RawArc::new("s", "1", "2", 1, true),
            ],
            windows: w,
        })
        .unwrap()
    }

    #[test]
    fn three_cycle_without_windows() {
        assert_eq!(oracle_optimum(&cycle(None)).unwrap().cost, 6);
    }

    #[test]
    fn three_cycle_with_two_minutes_wait() {
        // Reaching 2 at time 1, b is blocked until 3.
        let r = oracle_optimum(&cycle(Some([1, 3]))).unwrap();
        assert_eq!(r.cost, 3 + 5);
    }
}
