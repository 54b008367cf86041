//! Base problem: directed multigraph, unavailability calendar, instance
//! validation and the canonical raw (string-keyed) form used for files.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::reach;

/// Integer minutes.
pub type Time = i64;

/// Dense index of a base-graph vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

/// Dense index of a base-graph arc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArcId(pub usize);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v#{}", self.0)
    }
}

impl fmt::Display for ArcId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a#{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arc {
    pub name: String,
    pub tail: VertexId,
    pub head: VertexId,
    pub weight: Time,
    pub service: bool,
}

/// The arc cannot be occupied at any instant strictly inside `(lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Window {
    pub lo: Time,
    pub hi: Time,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstanceError {
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate arc id `{0}`")]
    DuplicateArc(String),
    #[error("arc `{arc}` refers to unknown vertex `{vertex}`")]
    UnknownVertex { arc: String, vertex: String },
    #[error("depot `{0}` is not a vertex")]
    UnknownDepot(String),
    #[error("arc `{0}` is a self-loop")]
    SelfLoop(String),
    #[error("arc `{0}` has weight {1}; weights must be at least 1")]
    BadWeight(String, Time),
    #[error("no service arcs")]
    NoServiceArcs,
    #[error("deadhead arcs do not form a strongly connected graph (vertex `{0}` is cut off)")]
    DeadheadNotStronglyConnected(String),
    #[error("number of agents must be at least 1")]
    NoAgents,
    #[error("horizon {0} is negative")]
    BadHorizon(Time),
    #[error("windows given for unknown arc `{0}`")]
    WindowOnUnknownArc(String),
    #[error("arc `{arc}` has malformed window ({lo}, {hi})")]
    BadWindow { arc: String, lo: Time, hi: Time },
    #[error("arc `{arc}` has a window ({lo}, {hi}) ending after the horizon {horizon}")]
    WindowPastHorizon { arc: String, lo: Time, hi: Time, horizon: Time },
    #[error("arc `{0}` has overlapping windows")]
    OverlappingWindows(String),
}

/// Directed multigraph with a depot. Arcs are identified by id, never by
/// endpoints, so parallel arcs are fine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseGraph {
    vertex_names: Vec<String>,
    arcs: Vec<Arc>,
    depot: VertexId,
    out_arcs: Vec<Vec<ArcId>>,
    in_arcs: Vec<Vec<ArcId>>,
    service: Vec<ArcId>,
    deadhead: Vec<ArcId>,
}

impl BaseGraph {
    pub fn new(vertex_names: Vec<String>, arcs: Vec<Arc>, depot: VertexId) -> Result<Self, InstanceError> {
        let n = vertex_names.len();
        let mut seen = BTreeSet::new();
        for v in &vertex_names {
            if !seen.insert(v.as_str()) {
                return Err(InstanceError::DuplicateVertex(v.clone()));
            }
        }
        if depot.0 >= n {
            return Err(InstanceError::UnknownDepot(alloc::format!("#{}", depot.0)));
        }
        let mut arc_names = BTreeSet::new();
        let mut out_arcs = alloc::vec![Vec::new(); n];
        let mut in_arcs = alloc::vec![Vec::new(); n];
        let mut service = Vec::new();
        let mut deadhead = Vec::new();
        for (i, a) in arcs.iter().enumerate() {
            if !arc_names.insert(a.name.as_str()) {
                return Err(InstanceError::DuplicateArc(a.name.clone()));
            }
            for end in [a.tail, a.head] {
                if end.0 >= n {
                    return Err(InstanceError::UnknownVertex {
                        arc: a.name.clone(),
                        vertex: alloc::format!("#{}", end.0),
                    });
                }
            }
            if a.tail == a.head {
                return Err(InstanceError::SelfLoop(a.name.clone()));
            }
            if a.weight < 1 {
                return Err(InstanceError::BadWeight(a.name.clone(), a.weight));
            }
            out_arcs[a.tail.0].push(ArcId(i));
            in_arcs[a.head.0].push(ArcId(i));
            if a.service {
                service.push(ArcId(i));
            } else {
                deadhead.push(ArcId(i));
            }
        }
        if service.is_empty() {
            return Err(InstanceError::NoServiceArcs);
        }
        let g = BaseGraph { vertex_names, arcs, depot, out_arcs, in_arcs, service, deadhead };
        if let Some(v) = g.deadhead_cut_off_vertex() {
            return Err(InstanceError::DeadheadNotStronglyConnected(g.vertex_names[v.0].clone()));
        }
        Ok(g)
    }

    /// Some vertex not in the depot's deadhead strong component, if any.
    fn deadhead_cut_off_vertex(&self) -> Option<VertexId> {
        let n = self.vertex_count();
        let active = alloc::vec![true; n];
        let succ = |v: usize| self.deadhead_out(VertexId(v)).map(|a| self.arcs[a.0].head.0).collect::<Vec<_>>();
        let pred = |v: usize| {
            self.in_arcs[v]
                .iter()
                .filter(|a| !self.arcs[a.0].service)
                .map(|a| self.arcs[a.0].tail.0)
                .collect::<Vec<_>>()
        };
        if reach::strongly_connected(&active, succ, pred) {
            return None;
        }
        // Report the first vertex that fails mutual reachability with the depot.
        let fwd = self.deadhead_reach(self.depot, true);
        let bwd = self.deadhead_reach(self.depot, false);
        (0..n).find(|&v| !(fwd[v] && bwd[v])).map(VertexId)
    }

    fn deadhead_reach(&self, from: VertexId, forward: bool) -> Vec<bool> {
        let mut seen = alloc::vec![false; self.vertex_count()];
        let mut stack = alloc::vec![from.0];
        seen[from.0] = true;
        while let Some(v) = stack.pop() {
            let list = if forward { &self.out_arcs[v] } else { &self.in_arcs[v] };
            for a in list {
                let arc = &self.arcs[a.0];
                if arc.service {
                    continue;
                }
                let w = if forward { arc.head.0 } else { arc.tail.0 };
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertex_names[v.0]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertex_names
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<VertexId> {
        self.vertex_names.iter().position(|v| v == name).map(VertexId)
    }

    pub fn arc(&self, a: ArcId) -> &Arc {
        &self.arcs[a.0]
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc_by_name(&self, name: &str) -> Option<ArcId> {
        self.arcs.iter().position(|a| a.name == name).map(ArcId)
    }

    pub fn depot(&self) -> VertexId {
        self.depot
    }

    pub fn out_arcs(&self, v: VertexId) -> &[ArcId] {
        &self.out_arcs[v.0]
    }

    pub fn in_arcs(&self, v: VertexId) -> &[ArcId] {
        &self.in_arcs[v.0]
    }

    pub fn deadhead_out(&self, v: VertexId) -> impl Iterator<Item = ArcId> + '_ {
        self.out_arcs[v.0].iter().copied().filter(|a| !self.arcs[a.0].service)
    }

    /// Service arcs in arc-id order.
    pub fn service_arcs(&self) -> &[ArcId] {
        &self.service
    }

    /// Deadhead (non-service) arcs in arc-id order.
    pub fn deadhead_arcs(&self) -> &[ArcId] {
        &self.deadhead
    }
}

/// Per-arc sorted, disjoint unavailability windows plus the horizon after
/// which every arc is free.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Calendar {
    windows: Vec<Vec<Window>>,
    horizon: Time,
}

impl Calendar {
    /// Calendar with no windows for `arc_count` arcs.
    pub fn empty(arc_count: usize, horizon: Time) -> Self {
        Calendar { windows: alloc::vec![Vec::new(); arc_count], horizon }
    }

    /// Validates and canonicalises windows: sorts, merges touching intervals
    /// and rejects overlaps.
    pub fn new(
        graph: &BaseGraph,
        horizon: Time,
        windows: impl IntoIterator<Item = (ArcId, Vec<Window>)>,
    ) -> Result<Self, InstanceError> {
        if horizon < 0 {
            return Err(InstanceError::BadHorizon(horizon));
        }
        let mut cal = Calendar::empty(graph.arc_count(), horizon);
        for (arc, mut list) in windows {
            let name = &graph.arc(arc).name;
            for w in &list {
                if w.lo < 0 || w.lo >= w.hi {
                    return Err(InstanceError::BadWindow { arc: name.clone(), lo: w.lo, hi: w.hi });
                }
                if w.hi > horizon {
                    return Err(InstanceError::WindowPastHorizon { arc: name.clone(), lo: w.lo, hi: w.hi, horizon });
                }
            }
            list.append(&mut cal.windows[arc.0]);
            list.sort();
            let mut merged: Vec<Window> = Vec::with_capacity(list.len());
            for w in list {
                match merged.last_mut() {
                    Some(last) if w.lo < last.hi => return Err(InstanceError::OverlappingWindows(name.clone())),
                    Some(last) if w.lo == last.hi => last.hi = w.hi,
                    _ => merged.push(w),
                }
            }
            cal.windows[arc.0] = merged;
        }
        Ok(cal)
    }

    pub fn horizon(&self) -> Time {
        self.horizon
    }

    pub fn windows(&self, arc: ArcId) -> &[Window] {
        self.windows.get(arc.0).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn window_count(&self) -> usize {
        self.windows.iter().map(Vec::len).sum()
    }

    /// Departing at `depart` over an arc of running time `weight` would occupy
    /// it during some window: `lo - weight < depart < hi`. Unknown arcs are
    /// never blocked.
    pub fn is_window_blocked(&self, arc: ArcId, depart: Time, weight: Time) -> bool {
        self.windows(arc).iter().any(|w| w.lo - weight < depart && depart < w.hi)
    }

    /// Earliest departure `>= t` that is not blocked.
    pub fn earliest_departure(&self, arc: ArcId, t: Time, weight: Time) -> Time {
        let ws = self.windows(arc);
        let mut i = ws.partition_point(|w| w.hi <= t);
        let mut t = t;
        while let Some(w) = ws.get(i) {
            if w.lo - weight < t {
                t = w.hi;
                i += 1;
            } else {
                break;
            }
        }
        t
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub name: String,
    pub graph: BaseGraph,
    pub calendar: Calendar,
    pub num_agents: usize,
}

impl Instance {
    pub fn new(name: String, graph: BaseGraph, calendar: Calendar, num_agents: usize) -> Result<Self, InstanceError> {
        if num_agents == 0 {
            return Err(InstanceError::NoAgents);
        }
        Ok(Instance { name, graph, calendar, num_agents })
    }

    /// Earliest departure over a base arc from time `t`.
    pub fn depart(&self, arc: ArcId, t: Time) -> Time {
        self.calendar.earliest_departure(arc, t, self.graph.arc(arc).weight)
    }

    /// Arrival at the head of `arc` when reaching its tail at `t`.
    pub fn traverse(&self, arc: ArcId, t: Time) -> Time {
        self.depart(arc, t) + self.graph.arc(arc).weight
    }

    /// Validates a raw, string-keyed description.
    pub fn from_raw(raw: &RawInstance) -> Result<Self, InstanceError> {
        let index: BTreeMap<&str, VertexId> =
            raw.vertices.iter().enumerate().map(|(i, v)| (v.as_str(), VertexId(i))).collect();
        let lookup = |arc: &str, v: &str| {
            index.get(v).copied().ok_or_else(|| InstanceError::UnknownVertex { arc: arc.into(), vertex: v.into() })
        };
        let mut arcs = Vec::with_capacity(raw.arcs.len());
        for a in &raw.arcs {
            arcs.push(Arc {
                name: a.id.clone(),
                tail: lookup(&a.id, &a.tail)?,
                head: lookup(&a.id, &a.head)?,
                weight: a.weight,
                service: a.service,
            });
        }
        if index.len() != raw.vertices.len() {
            let mut seen = BTreeSet::new();
            let dup = raw.vertices.iter().find(|v| !seen.insert(v.as_str())).cloned().unwrap_or_default();
            return Err(InstanceError::DuplicateVertex(dup));
        }
        let depot =
            index.get(raw.depot.as_str()).copied().ok_or_else(|| InstanceError::UnknownDepot(raw.depot.clone()))?;
        let graph = BaseGraph::new(raw.vertices.clone(), arcs, depot)?;
        let mut windows = Vec::new();
        for (arc, list) in &raw.windows {
            let id = graph.arc_by_name(arc).ok_or_else(|| InstanceError::WindowOnUnknownArc(arc.clone()))?;
            windows.push((id, list.iter().map(|&[lo, hi]| Window { lo, hi }).collect()));
        }
        let calendar = Calendar::new(&graph, raw.horizon, windows)?;
        Instance::new(raw.name.clone(), graph, calendar, raw.num_agents)
    }

    /// Canonical raw form: vertices and arcs in index order, windows keyed by
    /// arc id (sorted map), only arcs that have windows.
    pub fn to_raw(&self) -> RawInstance {
        let g = &self.graph;
        let arcs = g
            .arcs()
            .iter()
            .map(|a| RawArc {
                id: a.name.clone(),
                tail: g.vertex_name(a.tail).into(),
                head: g.vertex_name(a.head).into(),
                weight: a.weight,
                service: a.service,
            })
            .collect();
        let windows = (0..g.arc_count())
            .filter(|&i| !self.calendar.windows(ArcId(i)).is_empty())
            .map(|i| {
                let list = self.calendar.windows(ArcId(i)).iter().map(|w| [w.lo, w.hi]).collect();
                (g.arc(ArcId(i)).name.clone(), list)
            })
            .collect();
        RawInstance {
            name: self.name.clone(),
            num_agents: self.num_agents,
            horizon: self.calendar.horizon(),
            depot: g.vertex_name(g.depot()).into(),
            vertices: g.vertex_names().to_vec(),
            arcs,
            windows,
        }
    }
}

/// String-keyed instance description mirroring the JSON file format.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct RawInstance {
    pub name: String,
    pub num_agents: usize,
    pub horizon: Time,
    pub depot: String,
    pub vertices: Vec<String>,
    pub arcs: Vec<RawArc>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub windows: BTreeMap<String, Vec<[Time; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct RawArc {
    pub id: String,
    pub tail: String,
    pub head: String,
    pub weight: Time,
    pub service: bool,
}

impl RawArc {
    pub fn new(id: &str, tail: &str, head: &str, weight: Time, service: bool) -> Self {
        RawArc { id: id.into(), tail: tail.into(), head: head.into(), weight, service }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    pub(crate) fn triangle() -> RawInstance {
        RawInstance {
            name: "triangle".into(),
            num_agents: 1,
            horizon: 20,
            depot: "1".into(),
            vertices: vec!["1".into(), "2".into(), "3".into()],
            arcs: vec![
                RawArc::new("a", "1", "2", 1, false),
                RawArc::new("b", "2", "3", 1, false),
                RawArc::new("c", "3", "1", 1, false),
                RawArc::new("s", "1", "2", 1, true),
            ],
            windows: BTreeMap::new(),
        }
    }

    fn window_cal(lo: Time, hi: Time) -> (Instance, ArcId) {
        let mut raw = triangle();
        raw.windows.insert("s".into(), vec![[lo, hi]]);
        let inst = Instance::from_raw(&raw).unwrap();
        let s = inst.graph.arc_by_name("s").unwrap();
        (inst, s)
    }

    #[test]
    fn blocked_strictly_inside_shifted_window() {
        let (inst, s) = window_cal(5, 9);
        let cal = &inst.calendar;
        assert!(cal.is_window_blocked(s, 4, 2));
        assert!(!cal.is_window_blocked(s, 3, 2));
        assert!(!cal.is_window_blocked(s, 9, 2));
        assert!(!cal.is_window_blocked(ArcId(0), 6, 2));
        assert!(!cal.is_window_blocked(ArcId(99), 6, 2));
    }

    #[test]
    fn earliest_departure_skips_chained_windows() {
        let mut raw = triangle();
        raw.windows.insert("s".into(), vec![[5, 9], [10, 14], [20, 20 + 1]]);
        raw.horizon = 30;
        let inst = Instance::from_raw(&raw).unwrap();
        let s = inst.graph.arc_by_name("s").unwrap();
        // Weight 2 blocks (3,9), (8,14), (18,21): leaving at 4 lands on 9,
        // which is inside (8,14), so we wait until 14.
        assert_eq!(inst.calendar.earliest_departure(s, 4, 2), 14);
        assert_eq!(inst.calendar.earliest_departure(s, 3, 2), 3);
        assert_eq!(inst.calendar.earliest_departure(s, 15, 2), 15);
        assert_eq!(inst.calendar.earliest_departure(s, 19, 2), 21);
    }

    #[test]
    fn triangle_loads() {
        let inst = Instance::from_raw(&triangle()).unwrap();
        assert_eq!(inst.graph.vertex_count(), 3);
        assert_eq!(inst.graph.arc_count(), 4);
        assert_eq!(inst.graph.service_arcs(), &[ArcId(3)]);
        assert_eq!(inst.to_raw(), triangle());
    }

    #[test]
    fn touching_windows_merge_and_overlaps_fail() {
        let mut raw = triangle();
        raw.windows.insert("b".into(), vec![[6, 8], [2, 6]]);
        let inst = Instance::from_raw(&raw).unwrap();
        assert_eq!(inst.calendar.windows(ArcId(1)), &[Window { lo: 2, hi: 8 }]);

        raw.windows.insert("b".into(), vec![[2, 7], [6, 8]]);
        assert_eq!(Instance::from_raw(&raw), Err(InstanceError::OverlappingWindows("b".into())));
    }

    #[test]
    fn validation_names_offenders() {
        let mut raw = triangle();
        raw.arcs[2].weight = 0;
        assert_eq!(Instance::from_raw(&raw), Err(InstanceError::BadWeight("c".into(), 0)));

        let mut raw = triangle();
        raw.arcs[0].service = true;
        raw.arcs[3].service = false;
        // a (1->2) is now required and the deadhead graph still has s (1->2).
        assert!(Instance::from_raw(&raw).is_ok());

        let mut raw = triangle();
        raw.arcs[1].service = true;
        assert_eq!(
            Instance::from_raw(&raw).unwrap_err().to_string(),
            "deadhead arcs do not form a strongly connected graph (vertex `2` is cut off)"
        );

        let mut raw = triangle();
        raw.arcs[1].head = "2".into();
        assert_eq!(Instance::from_raw(&raw), Err(InstanceError::SelfLoop("b".into())));

        let mut raw = triangle();
        raw.windows.insert("zz".into(), vec![[1, 2]]);
        assert_eq!(Instance::from_raw(&raw), Err(InstanceError::WindowOnUnknownArc("zz".into())));

        let mut raw = triangle();
        raw.windows.insert("a".into(), vec![[1, 21]]);
        assert!(matches!(Instance::from_raw(&raw), Err(InstanceError::WindowPastHorizon { .. })));

        let mut raw = triangle();
        raw.num_agents = 0;
        assert_eq!(Instance::from_raw(&raw), Err(InstanceError::NoAgents));
    }
}
