//! LP relaxation of the spatial routing problem at a search node.
//!
//! Column `j < |𝒜|` is replicated arc `j`; the last column is the makespan
//! estimate. Rows, in order: flow balance per replicated vertex, one unit out
//! of each agent source, one copy per service arc, one makespan row per agent,
//! then the cut rows.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::graph::Time;
use crate::lp::{LpProblem, Relation};
use crate::replicated::{ArcCategory, ReplicatedGraph};
use crate::separation::Cut;

/// Shape of the per-agent makespan rows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GammaRows {
    /// Agent `k`'s row bounds the makespan by its committed time plus the
    /// weight of its own arcs after its last assigned service.
    #[default]
    PerAgent,
    /// Every agent's row carries the weight of all agents' free real arcs.
    /// Not a valid bound with several agents; kept for comparison runs.
    Verbatim,
}

/// Per-agent commitments of a node.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AgentCommit {
    /// Replicated arcs of the forced walk, in order (may be empty).
    pub path: Vec<usize>,
    /// Lower bound on the time the agent finishes its assigned prefix.
    pub committed: Time,
    /// Number of services assigned so far.
    pub assigned: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NodeFixings {
    pub fixed_one: BTreeSet<usize>,
    pub fixed_zero: BTreeSet<usize>,
    pub agents: Vec<AgentCommit>,
}

impl NodeFixings {
    pub fn root(rg: &ReplicatedGraph) -> Self {
        NodeFixings { agents: alloc::vec![AgentCommit::default(); rg.num_agents()], ..Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SpatialError {
    #[error("arc {0} is fixed to both 0 and 1")]
    Conflict(usize),
    #[error("forced walk of agent {agent} is broken at arc {arc}")]
    BrokenPath { agent: usize, arc: usize },
    #[error("forced walk of agent {agent} does not start at its source")]
    PathStart { agent: usize },
}

#[derive(Clone, Debug)]
pub struct SpatialLp {
    pub problem: LpProblem,
    pub gamma_col: usize,
    /// Index of the first cut row.
    pub cut_rows: usize,
}

pub fn assemble(
    rg: &ReplicatedGraph,
    fix: &NodeFixings,
    cuts: &[Cut],
    rows: GammaRows,
) -> Result<SpatialLp, SpatialError> {
    if let Some(&a) = fix.fixed_one.intersection(&fix.fixed_zero).next() {
        return Err(SpatialError::Conflict(a));
    }
    let mut forced = BTreeSet::new();
    for (k, c) in fix.agents.iter().enumerate() {
        if let Some(&first) = c.path.first() {
            if rg.arc(first).tail != rg.source(k) {
                return Err(SpatialError::PathStart { agent: k });
            }
        }
        for w in c.path.windows(2) {
            if rg.arc(w[0]).head != rg.arc(w[1]).tail {
                return Err(SpatialError::BrokenPath { agent: k, arc: w[1] });
            }
        }
        for &a in &c.path {
            if fix.fixed_zero.contains(&a) {
                return Err(SpatialError::Conflict(a));
            }
            forced.insert(a);
        }
    }

    let mut p = LpProblem::new();
    for (j, arc) in rg.arcs().iter().enumerate() {
        let (lo, hi) = if fix.fixed_one.contains(&j) || forced.contains(&j) {
            (1.0, 1.0)
        } else if fix.fixed_zero.contains(&j) {
            (0.0, 0.0)
        } else {
            (0.0, 1.0)
        };
        // Fixed arcs keep their weight so the value is the full cost.
        p.add_var(arc.weight as f64, lo, hi);
    }
    let gamma_col = p.add_var(1.0, 0.0, f64::INFINITY);

    for v in 0..rg.vertex_count() {
        let mut terms: Vec<(usize, f64)> = rg.out_arcs(v).iter().map(|&a| (a, 1.0)).collect();
        terms.extend(rg.in_arcs(v).iter().map(|&a| (a, -1.0)));
        p.add_row(terms, Relation::Eq, 0.0);
    }
    for k in 0..rg.num_agents() {
        let terms = rg.out_arcs(rg.source(k)).iter().map(|&a| (a, 1.0)).collect();
        p.add_row(terms, Relation::Eq, 1.0);
    }
    for s in 0..rg.services().len() {
        let terms = rg.copies_of(s).into_iter().map(|a| (a, 1.0)).collect();
        p.add_row(terms, Relation::Eq, 1.0);
    }
    for (k, c) in fix.agents.iter().enumerate() {
        let free_real = |j: usize| rg.arc(j).category.is_real() && !forced.contains(&j);
        let mut terms = alloc::vec![(gamma_col, 1.0)];
        match rows {
            GammaRows::Verbatim => {
                terms.extend((0..rg.arc_count()).filter(|&j| free_real(j)).map(|j| (j, -(rg.arc(j).weight as f64))));
            }
            GammaRows::PerAgent => {
                terms.extend(
                    rg.agent_arcs(k)
                        .filter(|&j| free_real(j) && rg.arc(j).layer > c.assigned)
                        .map(|j| (j, -(rg.arc(j).weight as f64))),
                );
            }
        }
        p.add_row(terms, Relation::Ge, c.committed as f64);
    }
    let cut_rows = p.num_rows();
    for cut in cuts {
        p.add_row(cut.support.iter().map(|&a| (a, 1.0)).collect(), Relation::Ge, 1.0);
    }
    Ok(SpatialLp { problem: p, gamma_col, cut_rows })
}

/// Fuel of an integer arc vector: weights of real arcs times multiplicity.
pub fn spatial_cost(rg: &ReplicatedGraph, x: &[i64]) -> i64 {
    rg.arcs().iter().zip(x).filter(|(a, _)| a.category.is_real()).map(|(a, &v)| a.weight * v).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ServiceMode {
    /// Each service arc is covered by exactly one copy.
    Strict,
    /// At least one copy (the relaxed polyhedron).
    Cgf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("wrong vector length")]
    Length,
    #[error("negative value on arc {0}")]
    Negative(usize),
    #[error("flow unbalanced at vertex {0}")]
    Flow(usize),
    #[error("source of agent {0} does not emit one unit")]
    Source(usize),
    #[error("service arc {0} not covered as required")]
    Service(usize),
}

/// Checks flow, source and service rows for an integer vector.
pub fn check_feasible_integer(rg: &ReplicatedGraph, x: &[i64], mode: ServiceMode) -> Result<(), Violation> {
    if x.len() != rg.arc_count() {
        return Err(Violation::Length);
    }
    if let Some(j) = x.iter().position(|&v| v < 0) {
        return Err(Violation::Negative(j));
    }
    for v in 0..rg.vertex_count() {
        let out: i64 = rg.out_arcs(v).iter().map(|&a| x[a]).sum();
        let inn: i64 = rg.in_arcs(v).iter().map(|&a| x[a]).sum();
        if out != inn {
            return Err(Violation::Flow(v));
        }
    }
    for k in 0..rg.num_agents() {
        if rg.out_arcs(rg.source(k)).iter().map(|&a| x[a]).sum::<i64>() != 1 {
            return Err(Violation::Source(k));
        }
    }
    for s in 0..rg.services().len() {
        let n: i64 = rg.copies_of(s).into_iter().map(|a| x[a]).sum();
        let ok = match mode {
            ServiceMode::Strict => n == 1,
            ServiceMode::Cgf => n >= 1,
        };
        if !ok {
            return Err(Violation::Service(s));
        }
    }
    Ok(())
}

/// Rounds an LP point to the nearest integers.
pub fn round_solution(x: &[f64]) -> Vec<i64> {
    x.iter().map(|&v| libm::round(v) as i64).collect()
}

/// The cascade arcs every agent uses, plus one source-sink arc per agent.
pub fn idle_solution(rg: &ReplicatedGraph) -> Vec<i64> {
    let mut x = alloc::vec![0; rg.arc_count()];
    for k in 0..rg.num_agents() {
        x[rg.source_sink(k)] = 1;
        x[rg.sink_source(k)] = 1;
    }
    x
}

/// Count of replicated arcs per category with nonzero value.
pub fn category_usage(rg: &ReplicatedGraph, x: &[i64]) -> [(ArcCategory, i64); 6] {
    let cats = [
        ArcCategory::IntraLayer,
        ArcCategory::InterLayer,
        ArcCategory::SourceSink,
        ArcCategory::SinkSource,
        ArcCategory::SourceDepot,
        ArcCategory::DepotSink,
    ];
    cats.map(|c| (c, rg.arcs().iter().zip(x).filter(|(a, _)| a.category == c).map(|(_, &v)| v).sum()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{solve_lp, LpStatus};
    use crate::replicated::tests::appendix;

    #[test]
    fn root_model_size() {
        let (_, rg) = appendix();
        let lp = assemble(&rg, &NodeFixings::root(&rg), &[], GammaRows::PerAgent).unwrap();
        assert_eq!(lp.problem.num_rows(), 22 + 2 + 2 + 2);
        assert_eq!(lp.problem.num_vars(), 43);
        assert_eq!(lp.gamma_col, 42);
    }

    #[test]
    fn empty_paths_give_full_weight_row() {
        let (_, rg) = appendix();
        let lp = assemble(&rg, &NodeFixings::root(&rg), &[], GammaRows::Verbatim).unwrap();
        let row = &lp.problem.rows()[22 + 2 + 2];
        let real = rg.arcs().iter().filter(|a| a.category.is_real()).count();
        assert_eq!(row.terms.len(), real + 1);
        assert_eq!(row.rhs, 0.0);
    }

    #[test]
    fn fixed_source_sink_forces_idle_agent() {
        let (_, rg) = appendix();
        let mut fix = NodeFixings::root(&rg);
        fix.fixed_one.insert(rg.source_sink(1));
        let lp = assemble(&rg, &fix, &[], GammaRows::PerAgent).unwrap();
        let r = solve_lp(&lp.problem).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!(r.x[rg.source_depot(1)].abs() < 1e-9);
        assert!(rg.copies_of(0).iter().filter(|&&a| rg.arc(a).agent == 1).all(|&a| r.x[a].abs() < 1e-9));
    }

    #[test]
    fn conflicting_fixings_rejected() {
        let (_, rg) = appendix();
        let mut fix = NodeFixings::root(&rg);
        fix.fixed_one.insert(3);
        fix.fixed_zero.insert(3);
        assert_eq!(assemble(&rg, &fix, &[], GammaRows::PerAgent).unwrap_err(), SpatialError::Conflict(3));
    }

    #[test]
    fn costs_and_feasibility() {
        let (_, rg) = appendix();
        let mut x = idle_solution(&rg);
        assert_eq!(spatial_cost(&rg, &x), 0);
        // Agent 0 tour: depot 1 -d1-> 2 -s1-> 3 (layer 2) -s2-> 1 (layer 3) -> sink.
        x[rg.source_sink(0)] = 0;
        x[rg.source_depot(0)] = 1;
        x[rg.intra(0, 0, 1)] = 1;
        x[rg.copy(0, 0, 1)] = 1;
        x[rg.copy(1, 0, 2)] = 1;
        x[rg.depot_sink(0, 3)] = 1;
        assert_eq!(spatial_cost(&rg, &x), 2 + 4 + 5);
        assert_eq!(check_feasible_integer(&rg, &x, ServiceMode::Strict), Ok(()));
        let mut twice = x.clone();
        twice[rg.intra(0, 0, 1)] = 2;
        assert_eq!(spatial_cost(&rg, &twice), 2 * 2 + 4 + 5);
        let mut broken = x.clone();
        broken[rg.depot_sink(0, 3)] = 0;
        assert!(matches!(check_feasible_integer(&rg, &broken, ServiceMode::Strict), Err(Violation::Flow(_))));
    }

    #[test]
    fn double_service_strict_vs_relaxed() {
        let (_, rg) = appendix();
        let mut x = idle_solution(&rg);
        // Agent 0: 1 -d1-> 2 -s1-> 3 -d3-> 1 -d1-> 2 -s1-> 3 -s2-> 1
        x[rg.source_sink(0)] = 0;
        x[rg.source_depot(0)] = 1;
        x[rg.intra(0, 0, 1)] = 1;
        x[rg.copy(0, 0, 1)] = 1;
        x[rg.intra(2, 0, 2)] = 1;
        x[rg.intra(0, 0, 2)] = 1;
        x[rg.copy(0, 0, 2)] = 1;
        x[rg.intra(2, 0, 3)] = 1;
        x[rg.depot_sink(0, 3)] = 1;
        // s2 not yet served: cover it with agent 1 in its first layer.
        x[rg.source_sink(1)] = 0;
        x[rg.source_depot(1)] = 1;
        x[rg.intra(0, 1, 1)] = 1;
        x[rg.intra(1, 1, 1)] = 1;
        x[rg.copy(1, 1, 1)] = 1;
        x[rg.depot_sink(1, 2)] = 1;
        assert_eq!(check_feasible_integer(&rg, &x, ServiceMode::Cgf), Ok(()));
        assert_eq!(check_feasible_integer(&rg, &x, ServiceMode::Strict), Err(Violation::Service(0)));
    }
}
