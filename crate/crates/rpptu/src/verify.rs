//! Polyhedral checks on a small instance: dimension of the relaxed
//! polyhedron, rank of its equality system, the constructive affinely
//! independent family, and validity/facetness of the cuts the solver emits.

use rpptu_core::bnc::{solve_with, BncConfig, NoClock, Observer};
use rpptu_core::lp::{LpSolver, LpStatus, RevisedSimplex};
use rpptu_core::polyhedra::{
    affine_dimension, affine_rank, construct_lemma1_family, enumerate_cgf_points, equality_rank, verify_facet,
    EnumConfig, EnumError, PointCloud,
};
use rpptu_core::separation::{find_cuts, side_conditions, Cut, CutPool};
use rpptu_core::spatial::{assemble, GammaRows, NodeFixings};
use rpptu_core::{Instance, ReplicatedGraph};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Expectation {
    pub expected: usize,
    pub computed: usize,
    pub pass: bool,
}

impl Expectation {
    fn new(expected: usize, computed: usize) -> Self {
        Expectation { expected, computed, pass: expected == computed }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyCheck {
    pub count: Expectation,
    pub affine_rank: Expectation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CutCheck {
    pub service: String,
    pub agent: usize,
    /// Replicated vertex ids of the set.
    pub set: Vec<usize>,
    pub support: usize,
    pub side_conditions: bool,
    pub valid: bool,
    pub tight_dim: Option<usize>,
    pub dim: usize,
    pub facet: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub instance: String,
    pub agents: usize,
    pub replicated_vertices: usize,
    pub replicated_arcs: usize,
    pub points: usize,
    pub rays: usize,
    /// Dimension of the relaxed polyhedron against `|arcs| - |vertices|`.
    pub dimension: Expectation,
    /// Rank of flow and source rows against `|vertices|`.
    pub equality_rank: Expectation,
    /// `None` with a single agent, where the construction does not apply.
    pub family: Option<FamilyCheck>,
    pub cuts: Vec<CutCheck>,
    pub pass: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Enumeration(#[from] EnumError),
    #[error("cut search failed: {0}")]
    Solver(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    pub enumeration: EnumConfig,
    /// Node budget of the solve whose cuts are checked.
    pub node_budget: usize,
    /// Separation rounds on the root relaxation.
    pub root_rounds: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            enumeration: EnumConfig { arc_limit: 120, ..EnumConfig::default() },
            node_budget: 200,
            root_rounds: 10,
        }
    }
}

#[derive(Default)]
struct Collect(CutPool);

impl Observer for Collect {
    fn on_cut(&mut self, _node: usize, cut: &Cut) {
        self.0.add(cut.clone());
    }
}

/// Cuts emitted by a branch-and-cut run plus those found by repeated
/// separation on the root relaxation, without duplicates, in emission order.
pub fn emitted_cuts(inst: &Instance, rg: &ReplicatedGraph, cfg: &VerifyConfig) -> Result<Vec<Cut>, VerifyError> {
    let mut seen = Collect::default();
    let bnc = BncConfig { node_budget: cfg.node_budget, ..BncConfig::default() };
    solve_with(inst, &bnc, &NoClock, &mut seen, &RevisedSimplex::default())
        .map_err(|e| VerifyError::Solver(e.to_string()))?;
    let mut pool = seen.0;
    let fix = NodeFixings::root(rg);
    for _ in 0..cfg.root_rounds {
        let lp =
            assemble(rg, &fix, pool.cuts(), GammaRows::PerAgent).map_err(|e| VerifyError::Solver(e.to_string()))?;
        let res = RevisedSimplex::default().solve(&lp.problem).map_err(|e| VerifyError::Solver(e.to_string()))?;
        if res.status != LpStatus::Optimal {
            break;
        }
        let found = find_cuts(rg, &res.x[..rg.arc_count()], &pool);
        if found.is_empty() {
            break;
        }
        for c in found {
            pool.add(c);
        }
    }
    Ok(pool.cuts().to_vec())
}

pub fn check_cut(inst: &Instance, rg: &ReplicatedGraph, cut: &Cut, cloud: &PointCloud) -> CutCheck {
    let report = verify_facet(cut, cloud);
    let origin = cut.origin.as_ref();
    let set: Vec<usize> = origin.map(|o| o.set.clone()).unwrap_or_default();
    CutCheck {
        service: origin.map(|o| inst.graph.arc(rg.services()[o.service]).name.clone()).unwrap_or_default(),
        agent: origin.map_or(0, |o| o.agent + 1),
        support: cut.support.len(),
        side_conditions: origin.is_some_and(|o| side_conditions(rg, o.service, &set.iter().copied().collect())),
        set,
        valid: report.valid,
        tight_dim: report.tight_dim,
        dim: report.dim,
        facet: report.facet,
    }
}

pub fn verify_instance(inst: &Instance, cfg: &VerifyConfig) -> Result<VerifyReport, VerifyError> {
    let rg = ReplicatedGraph::build(inst);
    let cloud = enumerate_cgf_points(inst, &rg, cfg.enumeration)?;
    let dim = affine_dimension(&cloud);
    let dimension = Expectation::new(rg.arc_count() - rg.vertex_count(), dim);
    let equality_rank = Expectation::new(rg.vertex_count(), equality_rank(&rg));
    let family = construct_lemma1_family(inst, &rg).ok().map(|fam| FamilyCheck {
        count: Expectation::new(rg.arc_count() - rg.vertex_count() + 1, fam.len()),
        affine_rank: Expectation::new(rg.arc_count() - rg.vertex_count(), affine_rank(&fam)),
    });
    let cuts: Vec<CutCheck> = emitted_cuts(inst, &rg, cfg)?.iter().map(|c| check_cut(inst, &rg, c, &cloud)).collect();
    let pass = dimension.pass
        && equality_rank.pass
        && family.as_ref().is_none_or(|f| f.count.pass && f.affine_rank.pass)
        && cuts.iter().all(|c| c.valid && (!c.side_conditions || c.facet));
    Ok(VerifyReport {
        instance: inst.name.clone(),
        agents: inst.num_agents,
        replicated_vertices: rg.vertex_count(),
        replicated_arcs: rg.arc_count(),
        points: cloud.points.len(),
        rays: cloud.rays.len(),
        dimension,
        equality_rank,
        family,
        cuts,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn appendix_report() {
        let inst = Instance::from_raw(&fixtures::appendix()).unwrap();
        let r = verify_instance(&inst, &VerifyConfig::default()).unwrap();
        assert_eq!(r.dimension, Expectation::new(20, 20));
        assert_eq!(r.equality_rank, Expectation::new(22, 22));
        let fam = r.family.unwrap();
        assert_eq!(fam.count, Expectation::new(21, 21));
        assert_eq!(fam.affine_rank, Expectation::new(20, 20));
        assert!(r.cuts.iter().all(|c| c.valid));
    }
}
