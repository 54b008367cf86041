//! Best-first branch-and-cut over service assignments.
//!
//! A node fixes, for some agents, which service arcs they perform and in what
//! order (one per layer). Each node solves the spatial LP; integral points are
//! timed to obtain an upper bound; fractional points are first tightened with
//! cuts and then branched on by assigning every still-open service arc to the
//! next layer of one agent, plus one child that closes that agent.

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::{ArcId, Instance, Time, VertexId};
use crate::lp::{is_integral, Basis, LpError, LpProblem, LpSolver, LpStatus, RevisedSimplex, EPS_INT};
use crate::replicated::{ArcCategory, ReplicatedGraph};
use crate::separation::{find_cuts, Cut, CutPool};
use crate::spatial::{assemble, round_solution, GammaRows, NodeFixings, SpatialError};
use crate::temporal::{
    best_completion, extract_walks, fastest_path, routes_to_x, service_orders, solve_temporal, AgentRoute, Trajectory,
};

/// How an assignment child commits the agent's movement.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PathPolicy {
    /// Only the service copy is fixed; once every arc is assigned, the best
    /// deadhead legs for that assignment are computed exactly.
    #[default]
    Exact,
    /// The fastest deadhead path to the service arc is fixed as well.
    ForcedFastest,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BncConfig {
    /// Evaluated nodes before giving up (re-solves after cuts do not count).
    pub node_budget: usize,
    pub time_budget_ms: Option<u64>,
    pub cuts: bool,
    pub gamma_rows: GammaRows,
    pub paths: PathPolicy,
    /// Separation rounds per node.
    pub max_cut_rounds: usize,
}

impl Default for BncConfig {
    fn default() -> Self {
        BncConfig {
            node_budget: 1000,
            time_budget_ms: None,
            cuts: true,
            gamma_rows: GammaRows::PerAgent,
            paths: PathPolicy::Exact,
            max_cut_rounds: 20,
        }
    }
}

pub trait Clock {
    fn elapsed_ms(&self) -> u64;
}

/// A clock that never advances; time budgets are then never hit.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed_ms(&self) -> u64 {
        0
    }
}

/// Hooks for logging cuts and dumping node LPs.
pub trait Observer {
    fn on_cut(&mut self, _node: usize, _cut: &Cut) {}
    fn on_lp(&mut self, _node: usize, _lp: &LpProblem) {}
}

impl Observer for () {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Optimal,
    /// Budget exhausted with an open gap.
    Gap,
    Infeasible,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub nodes: usize,
    pub cuts: usize,
    pub lp_solves: usize,
    pub lp_iterations: usize,
    pub max_depth: usize,
    pub best_lb: Option<Time>,
    pub best_ub: Option<Time>,
    pub optimal: bool,
    pub wall_ms: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub status: Status,
    pub objective: Option<Time>,
    pub routes: Vec<AgentRoute>,
    pub x: Vec<i64>,
    pub trajectory: Option<Trajectory>,
    pub stats: SolveStats,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum BncError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Spatial(#[from] SpatialError),
}

#[derive(Clone, Debug)]
struct Node {
    id: usize,
    depth: usize,
    lb: f64,
    /// Per agent, service indices in the order assigned.
    orders: Vec<Vec<usize>>,
    closed: Vec<bool>,
    /// Per agent, earliest time its assigned prefix can be finished.
    time: Vec<Time>,
    position: Vec<VertexId>,
    fix: NodeFixings,
    evaluated: bool,
    cut_rounds: usize,
    /// Final LP basis of the parent (or of this node's previous cut round).
    basis: Option<Basis>,
}

impl Node {
    fn assigned(&self) -> usize {
        self.orders.iter().map(Vec::len).sum()
    }
}

/// Picks the entry with the smallest bound, ties to the smallest id.
/// `None` when empty or when every bound is infinite.
pub fn select_leaf(entries: &[(usize, f64)]) -> Option<usize> {
    entries
        .iter()
        .filter(|(_, lb)| *lb != f64::INFINITY)
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|&(id, _)| id)
}

fn bound_to_int(lb: f64) -> Time {
    libm::ceil(lb - 1e-6) as Time
}

pub fn solve(inst: &Instance, cfg: &BncConfig) -> Result<Solution, BncError> {
    Solver::new(inst, cfg, &NoClock, &mut (), &RevisedSimplex::default()).run()
}

pub fn solve_with(
    inst: &Instance,
    cfg: &BncConfig,
    clock: &dyn Clock,
    observer: &mut dyn Observer,
    lp: &dyn LpSolver,
) -> Result<Solution, BncError> {
    Solver::new(inst, cfg, clock, observer, lp).run()
}

struct Solver<'a> {
    inst: &'a Instance,
    rg: ReplicatedGraph,
    cfg: &'a BncConfig,
    clock: &'a dyn Clock,
    observer: &'a mut dyn Observer,
    lp: &'a dyn LpSolver,
    pool: CutPool,
    stats: SolveStats,
    incumbent: Option<(Time, Vec<AgentRoute>)>,
    next_id: usize,
}

impl<'a> Solver<'a> {
    fn new(
        inst: &'a Instance,
        cfg: &'a BncConfig,
        clock: &'a dyn Clock,
        observer: &'a mut dyn Observer,
        lp: &'a dyn LpSolver,
    ) -> Self {
        Solver {
            inst,
            rg: ReplicatedGraph::build(inst),
            cfg,
            clock,
            observer,
            lp,
            pool: CutPool::new(),
            stats: SolveStats::default(),
            incumbent: None,
            next_id: 0,
        }
    }

    fn ub(&self) -> Option<Time> {
        self.incumbent.as_ref().map(|(c, _)| *c)
    }

    fn prunable(&self, lb: f64) -> bool {
        self.ub().is_some_and(|ub| bound_to_int(lb) >= ub)
    }

    fn offer(&mut self, cost: Time, routes: Vec<AgentRoute>) {
        if self.ub().is_none_or(|ub| cost < ub) {
            log::debug!("incumbent {cost}");
            self.incumbent = Some((cost, routes));
        }
    }

    fn root(&mut self) -> Node {
        let k = self.rg.num_agents();
        self.next_id = 1;
        Node {
            id: 0,
            depth: 0,
            lb: f64::NEG_INFINITY,
            orders: vec![Vec::new(); k],
            closed: vec![false; k],
            time: vec![0; k],
            position: vec![self.rg.depot(); k],
            fix: NodeFixings::root(&self.rg),
            evaluated: false,
            cut_rounds: 0,
            basis: None,
        }
    }

    fn run(mut self) -> Result<Solution, BncError> {
        let root = self.root();
        let mut open: Vec<Node> = vec![root];
        let mut status = Status::Optimal;
        loop {
            let entries: Vec<(usize, f64)> = open.iter().map(|n| (n.id, n.lb)).collect();
            let Some(id) = select_leaf(&entries) else {
                break;
            };
            let pos = open.iter().position(|n| n.id == id).expect("selected node is open");
            if self.prunable(open[pos].lb) {
                open.clear();
                break;
            }
            let over_time = self.cfg.time_budget_ms.is_some_and(|b| self.clock.elapsed_ms() >= b);
            if over_time || (!open[pos].evaluated && self.stats.nodes >= self.cfg.node_budget) {
                status = Status::Gap;
                break;
            }
            let node = open.swap_remove(pos);
            open.extend(self.process(node)?);
        }
        self.stats.wall_ms = self.clock.elapsed_ms();
        self.finish(status, &open)
    }

    fn finish(mut self, status: Status, open: &[Node]) -> Result<Solution, BncError> {
        let open_lb = open.iter().map(|n| n.lb).fold(f64::INFINITY, f64::min);
        let status = match (status, &self.incumbent) {
            (Status::Gap, _) => Status::Gap,
            (_, None) => Status::Infeasible,
            _ => Status::Optimal,
        };
        self.stats.best_ub = self.ub();
        self.stats.optimal = status == Status::Optimal;
        self.stats.best_lb = match status {
            Status::Optimal => self.ub(),
            Status::Gap if open_lb.is_finite() => Some(match self.ub() {
                Some(ub) => bound_to_int(open_lb).min(ub),
                None => bound_to_int(open_lb),
            }),
            _ => None,
        };
        let Some((cost, routes)) = self.incumbent.take() else {
            return Ok(Solution {
                status,
                objective: None,
                routes: Vec::new(),
                x: Vec::new(),
                trajectory: None,
                stats: self.stats,
            });
        };
        let x = routes_to_x(&self.rg, &routes);
        let trajectory = solve_temporal(self.inst, &self.rg, &x).ok();
        debug_assert_eq!(trajectory.as_ref().map(Trajectory::cost), Some(cost));
        Ok(Solution { status, objective: Some(cost), routes, x, trajectory, stats: self.stats })
    }

    /// Evaluates a node; returns the nodes to put back on the open list.
    fn process(&mut self, mut node: Node) -> Result<Vec<Node>, BncError> {
        if !node.evaluated {
            node.evaluated = true;
            self.stats.nodes += 1;
            self.stats.max_depth = self.stats.max_depth.max(node.depth);
        }
        let model = assemble(&self.rg, &node.fix, self.pool.cuts(), self.cfg.gamma_rows)?;
        self.observer.on_lp(node.id, &model.problem);
        let res = self.lp.solve_from(&model.problem, node.basis.as_ref())?;
        self.stats.lp_solves += 1;
        self.stats.lp_iterations += res.iterations;
        if res.status != LpStatus::Optimal {
            return Ok(Vec::new());
        }
        node.basis = res.basis.clone();
        node.lb = node.lb.max(res.objective);
        if self.prunable(node.lb) {
            return Ok(Vec::new());
        }
        let complete = node.assigned() == self.rg.services().len();
        if complete && self.cfg.paths == PathPolicy::Exact {
            let orders = self.base_orders(&node.orders);
            if let Some((cost, routes)) = best_completion(self.inst, &orders) {
                self.offer(cost, routes);
            }
            return Ok(Vec::new());
        }
        let x = &res.x[..self.rg.arc_count()];
        let (integral, _) = is_integral(x, EPS_INT);
        if integral {
            self.upper_bound_from(&round_solution(x));
            if complete {
                return Ok(Vec::new());
            }
        } else if self.cfg.cuts && node.cut_rounds < self.cfg.max_cut_rounds {
            let cuts = find_cuts(&self.rg, x, &self.pool);
            if !cuts.is_empty() {
                for c in cuts {
                    self.observer.on_cut(node.id, &c);
                    if self.pool.add(c) {
                        self.stats.cuts += 1;
                    }
                }
                node.cut_rounds += 1;
                return Ok(vec![node]);
            }
        }
        if complete {
            return Ok(Vec::new());
        }
        let target = self.target(&node, x, integral);
        Ok(self.branch(&node, x, target))
    }

    fn base_orders(&self, orders: &[Vec<usize>]) -> Vec<Vec<ArcId>> {
        orders.iter().map(|o| o.iter().map(|&s| self.rg.services()[s]).collect()).collect()
    }

    fn upper_bound_from(&mut self, xi: &[i64]) {
        if let Ok(walks) = extract_walks(&self.rg, xi) {
            if let Ok(tr) = solve_temporal(self.inst, &self.rg, xi) {
                let routes = walks.iter().map(|w| walk_route(&self.rg, w)).collect();
                self.offer(tr.cost(), routes);
            }
        }
        if self.cfg.paths == PathPolicy::Exact {
            let orders = service_orders(&self.rg, xi);
            if let Some((cost, routes)) = best_completion(self.inst, &orders) {
                self.offer(cost, routes);
            }
        }
    }

    /// Agent and layer of the next assignment.
    fn target(&self, node: &Node, x: &[f64], integral: bool) -> (usize, usize) {
        let rg = &self.rg;
        let frac = |v: f64| v > EPS_INT && v < 1.0 - EPS_INT;
        let avail: Vec<usize> = (0..rg.num_agents()).filter(|&k| !node.closed[k]).collect();
        let next = |k: usize| node.orders[k].len() + 1;
        let open_services = self.open_services(node);
        let by_layer =
            || avail.iter().map(|&k| (next(k), k)).min().map(|(l, k)| (k, l)).expect("an agent is available");
        if !integral {
            for &k in &avail {
                if open_services.iter().any(|&s| frac(x[rg.copy(s, k, next(k))])) {
                    return (k, next(k));
                }
            }
            for &k in &avail {
                if rg.agent_arcs(k).any(|a| frac(x[a])) {
                    return (k, next(k));
                }
            }
        }
        by_layer()
    }

    fn open_services(&self, node: &Node) -> Vec<usize> {
        let mut taken = vec![false; self.rg.services().len()];
        for &s in node.orders.iter().flatten() {
            taken[s] = true;
        }
        (0..taken.len()).filter(|&s| !taken[s]).collect()
    }

    fn branch(&mut self, node: &Node, x: &[f64], (k, l): (usize, usize)) -> Vec<Node> {
        let rg = &self.rg;
        let mut services = self.open_services(node);
        services.sort_by(|&a, &b| {
            let da = (x[rg.copy(a, k, l)] - 0.5).abs();
            let db = (x[rg.copy(b, k, l)] - 0.5).abs();
            da.total_cmp(&db).then(rg.services()[a].cmp(&rg.services()[b]))
        });
        let mut children = Vec::with_capacity(services.len() + 1);
        for s in services {
            let base = rg.services()[s];
            let arc = self.inst.graph.arc(base);
            let Some(fp) = fastest_path(self.inst, node.position[k], arc.tail, node.time[k]) else {
                continue;
            };
            let done = self.inst.traverse(base, fp.arrive);
            let mut child = node.clone();
            child.id = self.next_id;
            self.next_id += 1;
            child.depth += 1;
            child.evaluated = false;
            child.cut_rounds = 0;
            child.orders[k].push(s);
            child.time[k] = done;
            child.position[k] = arc.head;
            let copy = rg.copy(s, k, l);
            child.fix.fixed_one.insert(copy);
            let commit = &mut child.fix.agents[k];
            commit.committed = done;
            commit.assigned = l;
            if self.cfg.paths == PathPolicy::ForcedFastest {
                if commit.path.is_empty() {
                    commit.path.push(rg.source_depot(k));
                }
                for &d in &fp.arcs {
                    let di = rg.deadhead_index(d).expect("fastest paths use deadheads");
                    commit.path.push(rg.intra(di, k, l));
                }
                commit.path.push(copy);
            }
            children.push(child);
        }
        let available = node.closed.iter().filter(|&&c| !c).count();
        if available > 1 {
            let mut child = node.clone();
            child.id = self.next_id;
            self.next_id += 1;
            child.depth += 1;
            child.evaluated = false;
            child.cut_rounds = 0;
            child.closed[k] = true;
            for layer in l..rg.num_layers() {
                for s in 0..rg.services().len() {
                    child.fix.fixed_zero.insert(rg.copy(s, k, layer));
                }
            }
            children.push(child);
        }
        children
    }
}

/// Base-graph route of one agent's replicated walk.
pub fn walk_route(rg: &ReplicatedGraph, walk: &[usize]) -> AgentRoute {
    let mut route = AgentRoute::idle();
    if !walk.iter().any(|&a| rg.arc(a).category.is_real()) {
        return route;
    }
    route.legs.push(Vec::new());
    for &a in walk {
        let arc = rg.arc(a);
        match arc.category {
            ArcCategory::IntraLayer => route.legs.last_mut().expect("leg").push(arc.base.expect("real")),
            ArcCategory::InterLayer => {
                route.services.push(arc.base.expect("real"));
                route.legs.push(Vec::new());
            }
            _ => {}
        }
    }
    route
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leaf_selection() {
        assert_eq!(select_leaf(&[(1, f64::NEG_INFINITY), (2, 5.0)]), Some(1));
        assert_eq!(select_leaf(&[(1, 5.0), (2, 5.0)]), Some(1));
        assert_eq!(select_leaf(&[(2, 5.0), (1, 5.0)]), Some(1));
        assert_eq!(select_leaf(&[(1, f64::INFINITY)]), None);
        assert_eq!(select_leaf(&[]), None);
    }
}
