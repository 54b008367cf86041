//! Instance and solution files.
//!
//! Instances are stored in canonical form: vertices and arcs in file order,
//! windows merged and keyed by arc id in sorted order, pretty-printed JSON
//! with a trailing newline. Saving a loaded canonical file reproduces it byte
//! for byte.

use std::fs;
use std::path::{Path, PathBuf};

use rpptu_core::bnc::{Solution, SolveStats, Status};
use rpptu_core::temporal::Trajectory;
use rpptu_core::{Instance, InstanceError, RawInstance, ReplicatedGraph, Time};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {source}")]
    Invalid { path: PathBuf, source: InstanceError },
}

pub fn load_instance(path: &Path) -> Result<Instance, IoError> {
    parse_instance(&read_text(path)?, path)
}

/// `origin` only labels errors.
pub fn parse_instance(text: &str, origin: &Path) -> Result<Instance, IoError> {
    let raw: RawInstance =
        serde_json::from_str(text).map_err(|source| IoError::Parse { path: origin.into(), source })?;
    Instance::from_raw(&raw).map_err(|source| IoError::Invalid { path: origin.into(), source })
}

pub fn save_instance(inst: &Instance, path: &Path) -> Result<(), IoError> {
    write_text(path, &instance_json(inst))
}

pub fn instance_json(inst: &Instance) -> String {
    raw_json(&inst.to_raw())
}

pub fn raw_json(raw: &RawInstance) -> String {
    let mut s = serde_json::to_string_pretty(raw).expect("instances always serialise");
    s.push('\n');
    s
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::File { path: path.into(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|source| IoError::File { path: path.into(), source })
}

/// One traversal of a base arc.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub arc: String,
    pub service: bool,
    pub depart: Time,
    pub arrive: Time,
    pub wait_before: Time,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentRecord {
    pub agent: usize,
    pub steps: Vec<StepRecord>,
    pub finish: Time,
    pub waiting: Time,
    pub fuel: Time,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsRecord {
    pub nodes: usize,
    pub cuts: usize,
    pub lp_solves: usize,
    pub lp_iterations: usize,
    pub max_depth: usize,
    pub best_lb: Option<Time>,
    pub best_ub: Option<Time>,
    pub wall_ms: u64,
}

impl From<&SolveStats> for StatsRecord {
    fn from(s: &SolveStats) -> Self {
        StatsRecord {
            nodes: s.nodes,
            cuts: s.cuts,
            lp_solves: s.lp_solves,
            lp_iterations: s.lp_iterations,
            max_depth: s.max_depth,
            best_lb: s.best_lb,
            best_ub: s.best_ub,
            wall_ms: s.wall_ms,
        }
    }
}

/// The solution file written by `solve`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub instance: String,
    pub status: String,
    pub objective: Option<Time>,
    pub fuel: Option<Time>,
    pub gamma: Option<Time>,
    pub per_agent: Vec<AgentRecord>,
    pub stats: StatsRecord,
}

pub fn status_name(s: Status) -> &'static str {
    match s {
        Status::Optimal => "optimal",
        Status::Gap => "gap",
        Status::Infeasible => "infeasible",
    }
}

impl SolutionRecord {
    pub fn new(inst: &Instance, rg: &ReplicatedGraph, sol: &Solution) -> Self {
        let tr = sol.trajectory.as_ref();
        SolutionRecord {
            instance: inst.name.clone(),
            status: status_name(sol.status).into(),
            objective: sol.objective,
            fuel: tr.map(Trajectory::fuel),
            gamma: tr.map(|t| t.gamma),
            per_agent: tr.map(|t| agent_records(inst, rg, t)).unwrap_or_default(),
            stats: (&sol.stats).into(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("solutions always serialise");
        s.push('\n');
        s
    }
}

/// Base-arc steps per agent. Waiting before virtual arcs is carried over to
/// the next real step so per-agent totals are preserved.
fn agent_records(inst: &Instance, rg: &ReplicatedGraph, tr: &Trajectory) -> Vec<AgentRecord> {
    tr.agents
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let mut steps = Vec::new();
            let mut carried = 0;
            for st in &a.steps {
                carried += st.wait;
                let Some(base) = rg.arc(st.arc).base else { continue };
                let arc = inst.graph.arc(base);
                steps.push(StepRecord {
                    arc: arc.name.clone(),
                    service: rg.arc(st.arc).category == rpptu_core::replicated::ArcCategory::InterLayer,
                    depart: st.depart,
                    arrive: st.arrive,
                    wait_before: carried,
                });
                carried = 0;
            }
            AgentRecord { agent: k + 1, steps, finish: a.finish, waiting: a.waiting, fuel: a.fuel }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn canonical_round_trip() {
        let inst = Instance::from_raw(&fixtures::appendix()).unwrap();
        let text = instance_json(&inst);
        let back = parse_instance(&text, Path::new("appendix.json")).unwrap();
        assert_eq!(back, inst);
        assert_eq!(instance_json(&back), text);
    }

    #[test]
    fn errors_name_the_file() {
        let err = parse_instance("{", Path::new("broken.json")).unwrap_err();
        assert!(err.to_string().starts_with("broken.json:"));
        let mut raw = fixtures::appendix();
        raw.arcs[0].tail = "nowhere".into();
        let err = parse_instance(&raw_json(&raw), Path::new("bad.json")).unwrap_err();
        assert!(err.to_string().contains("nowhere"), "{err}");
    }
}
