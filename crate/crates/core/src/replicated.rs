//! Layered, cascaded multi-agent expansion of a base instance.
//!
//! Every agent gets `|A_*| + 1` copies of the base vertex set (layers
//! `1..=L`). Deadhead arcs are copied inside each layer; a service arc's copy
//! at layer `l` leads from its tail in layer `l` to its head in layer `l + 1`,
//! so traversal order is encoded by the layer index. Each agent also has a
//! source and a sink (layer 0) with plumbing arcs; sink `k` feeds source
//! `k + 1` (cyclically), which makes the whole graph strongly connected.
//!
//! Arc ids are agent-major: intra-layer copies (layer, then deadhead index),
//! inter-layer copies (layer, then service index), then source-sink,
//! sink-source, source-depot and the depot-sink arcs of layers `2..=L`.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::graph::{ArcId, Instance, Time, VertexId};
use crate::reach;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArcCategory {
    IntraLayer,
    InterLayer,
    SourceSink,
    SinkSource,
    SourceDepot,
    DepotSink,
}

impl ArcCategory {
    /// Real arcs carry a base arc (and its weight and windows).
    pub fn is_real(self) -> bool {
        matches!(self, ArcCategory::IntraLayer | ArcCategory::InterLayer)
    }

    pub fn label(self) -> &'static str {
        match self {
            ArcCategory::IntraLayer => "intra",
            ArcCategory::InterLayer => "inter",
            ArcCategory::SourceSink => "source-sink",
            ArcCategory::SinkSource => "sink-source",
            ArcCategory::SourceDepot => "source-depot",
            ArcCategory::DepotSink => "depot-sink",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RVertex {
    Layer { base: VertexId, agent: usize, layer: usize },
    Source(usize),
    Sink(usize),
}

impl fmt::Display for RVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RVertex::Layer { base, agent, layer } => write!(f, "v{}_k{}_l{}", base.0, agent + 1, layer),
            RVertex::Source(k) => write!(f, "s_k{}", k + 1),
            RVertex::Sink(k) => write!(f, "t_k{}", k + 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RArc {
    pub category: ArcCategory,
    pub base: Option<ArcId>,
    pub agent: usize,
    /// Layer of the tail vertex; 0 for arcs leaving a source or sink.
    pub layer: usize,
    pub tail: usize,
    pub head: usize,
    pub weight: Time,
}

/// Arcs leaving, entering and inside a vertex set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Boundary {
    pub delta_plus: Vec<usize>,
    pub delta_minus: Vec<usize>,
    pub inner: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct ReplicatedGraph {
    num_agents: usize,
    num_layers: usize,
    base_vertices: usize,
    depot: VertexId,
    services: Vec<ArcId>,
    deadheads: Vec<ArcId>,
    /// Base arc -> index into `services` (service arcs only).
    service_index: Vec<Option<usize>>,
    /// Base arc -> index into `deadheads` (deadhead arcs only).
    deadhead_index: Vec<Option<usize>>,
    arcs: Vec<RArc>,
    out: Vec<Vec<usize>>,
    inn: Vec<Vec<usize>>,
    per_agent: usize,
}

impl ReplicatedGraph {
    pub fn build(inst: &Instance) -> Self {
        let g = &inst.graph;
        let k_count = inst.num_agents;
        let services = g.service_arcs().to_vec();
        let deadheads = g.deadhead_arcs().to_vec();
        let layers = services.len() + 1;
        let nv = g.vertex_count();
        let mut service_index = vec![None; g.arc_count()];
        for (i, a) in services.iter().enumerate() {
            service_index[a.0] = Some(i);
        }
        let mut deadhead_index = vec![None; g.arc_count()];
        for (i, a) in deadheads.iter().enumerate() {
            deadhead_index[a.0] = Some(i);
        }
        let per_agent = deadheads.len() * layers + services.len() * (layers - 1) + 3 + (layers - 1);
        let mut rg = ReplicatedGraph {
            num_agents: k_count,
            num_layers: layers,
            base_vertices: nv,
            depot: g.depot(),
            services,
            deadheads,
            service_index,
            deadhead_index,
            arcs: Vec::with_capacity(per_agent * k_count),
            out: Vec::new(),
            inn: Vec::new(),
            per_agent,
        };
        let depot = g.depot();
        for k in 0..k_count {
            for l in 1..=layers {
                for &a in &rg.deadheads {
                    let arc = g.arc(a);
                    rg.arcs.push(RArc {
                        category: ArcCategory::IntraLayer,
                        base: Some(a),
                        agent: k,
                        layer: l,
                        tail: rg.layer_vertex(arc.tail, k, l),
                        head: rg.layer_vertex(arc.head, k, l),
                        weight: arc.weight,
                    });
                }
            }
            for l in 1..layers {
                for &a in &rg.services {
                    let arc = g.arc(a);
                    rg.arcs.push(RArc {
                        category: ArcCategory::InterLayer,
                        base: Some(a),
                        agent: k,
                        layer: l,
                        tail: rg.layer_vertex(arc.tail, k, l),
                        head: rg.layer_vertex(arc.head, k, l + 1),
                        weight: arc.weight,
                    });
                }
            }
            let virt =
                |category, layer, tail, head| RArc { category, base: None, agent: k, layer, tail, head, weight: 0 };
            let (s, t) = (rg.source(k), rg.sink(k));
            let next_source = rg.source((k + 1) % k_count);
            let d1 = rg.layer_vertex(depot, k, 1);
            rg.arcs.push(virt(ArcCategory::SourceSink, 0, s, t));
            rg.arcs.push(virt(ArcCategory::SinkSource, 0, t, next_source));
            rg.arcs.push(virt(ArcCategory::SourceDepot, 0, s, d1));
            for l in 2..=layers {
                let dl = rg.layer_vertex(depot, k, l);
                rg.arcs.push(virt(ArcCategory::DepotSink, l, dl, t));
            }
        }
        debug_assert_eq!(rg.arcs.len(), per_agent * k_count);
        let nvert = rg.vertex_count();
        rg.out = vec![Vec::new(); nvert];
        rg.inn = vec![Vec::new(); nvert];
        for (i, a) in rg.arcs.iter().enumerate() {
            rg.out[a.tail].push(i);
            rg.inn[a.head].push(i);
        }
        rg
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    /// `|L| = |A_*| + 1`.
    pub fn num_layers(&self) -> usize {
        self.num_layers
    }

    pub fn base_vertex_count(&self) -> usize {
        self.base_vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.base_vertices * self.num_agents * self.num_layers + 2 * self.num_agents
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn arc(&self, id: usize) -> &RArc {
        &self.arcs[id]
    }

    pub fn arcs(&self) -> &[RArc] {
        &self.arcs
    }

    pub fn out_arcs(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn in_arcs(&self, v: usize) -> &[usize] {
        &self.inn[v]
    }

    pub fn depot(&self) -> VertexId {
        self.depot
    }

    /// Service arcs in the order used for copy families.
    pub fn services(&self) -> &[ArcId] {
        &self.services
    }

    pub fn deadheads(&self) -> &[ArcId] {
        &self.deadheads
    }

    pub fn service_index(&self, a: ArcId) -> Option<usize> {
        self.service_index.get(a.0).copied().flatten()
    }

    pub fn deadhead_index(&self, a: ArcId) -> Option<usize> {
        self.deadhead_index.get(a.0).copied().flatten()
    }

    /// Replicated vertex `v_{i,k,l}` for `layer` in `1..=L`.
    pub fn layer_vertex(&self, base: VertexId, agent: usize, layer: usize) -> usize {
        debug_assert!((1..=self.num_layers).contains(&layer));
        (agent * self.num_layers + (layer - 1)) * self.base_vertices + base.0
    }

    pub fn source(&self, agent: usize) -> usize {
        self.base_vertices * self.num_agents * self.num_layers + agent
    }

    pub fn sink(&self, agent: usize) -> usize {
        self.base_vertices * self.num_agents * self.num_layers + self.num_agents + agent
    }

    pub fn vertex(&self, v: usize) -> RVertex {
        let layered = self.base_vertices * self.num_agents * self.num_layers;
        if v < layered {
            let base = v % self.base_vertices;
            let rest = v / self.base_vertices;
            RVertex::Layer { base: VertexId(base), agent: rest / self.num_layers, layer: rest % self.num_layers + 1 }
        } else if v < layered + self.num_agents {
            RVertex::Source(v - layered)
        } else {
            RVertex::Sink(v - layered - self.num_agents)
        }
    }

    pub fn is_depot_copy(&self, v: usize) -> bool {
        matches!(self.vertex(v), RVertex::Layer { base, .. } if base == self.depot)
    }

    /// Agent owning a vertex.
    pub fn vertex_agent(&self, v: usize) -> usize {
        match self.vertex(v) {
            RVertex::Layer { agent, .. } | RVertex::Source(agent) | RVertex::Sink(agent) => agent,
        }
    }

    fn agent_offset(&self, agent: usize) -> usize {
        agent * self.per_agent
    }

    /// Copy of the deadhead arc with index `d` (into [`deadheads`](Self::deadheads)).
    pub fn intra(&self, d: usize, agent: usize, layer: usize) -> usize {
        self.agent_offset(agent) + (layer - 1) * self.deadheads.len() + d
    }

    /// Copy `a_{q,k,l}` of the service arc with index `s`, `layer` in `1..L`.
    pub fn copy(&self, s: usize, agent: usize, layer: usize) -> usize {
        debug_assert!(layer >= 1 && layer < self.num_layers);
        self.agent_offset(agent) + self.deadheads.len() * self.num_layers + (layer - 1) * self.services.len() + s
    }

    fn virtual_base(&self, agent: usize) -> usize {
        self.agent_offset(agent) + self.deadheads.len() * self.num_layers + self.services.len() * (self.num_layers - 1)
    }

    pub fn source_sink(&self, agent: usize) -> usize {
        self.virtual_base(agent)
    }

    pub fn sink_source(&self, agent: usize) -> usize {
        self.virtual_base(agent) + 1
    }

    pub fn source_depot(&self, agent: usize) -> usize {
        self.virtual_base(agent) + 2
    }

    /// Depot-sink arc leaving the depot copy of `layer` (`2..=L`).
    pub fn depot_sink(&self, agent: usize, layer: usize) -> usize {
        debug_assert!(layer >= 2 && layer <= self.num_layers);
        self.virtual_base(agent) + 3 + (layer - 2)
    }

    /// All copies of the service arc with index `s`, agent-major then layer.
    pub fn copies_of(&self, s: usize) -> Vec<usize> {
        let mut v = Vec::with_capacity(self.num_agents * (self.num_layers - 1));
        for k in 0..self.num_agents {
            for l in 1..self.num_layers {
                v.push(self.copy(s, k, l));
            }
        }
        v
    }

    /// Arc ids of one agent's sub-graph (its arcs are contiguous).
    pub fn agent_arcs(&self, agent: usize) -> core::ops::Range<usize> {
        self.agent_offset(agent)..self.agent_offset(agent + 1)
    }

    pub fn category_count(&self, c: ArcCategory) -> usize {
        self.arcs.iter().filter(|a| a.category == c).count()
    }

    /// Arcs leaving, entering and inside `set`.
    pub fn boundary(&self, set: &BTreeSet<usize>) -> Boundary {
        let mut b = Boundary::default();
        let inside = self.membership(set);
        for (i, a) in self.arcs.iter().enumerate() {
            match (inside[a.tail], inside[a.head]) {
                (true, true) => b.inner.push(i),
                (true, false) => b.delta_plus.push(i),
                (false, true) => b.delta_minus.push(i),
                (false, false) => {}
            }
        }
        b
    }

    pub(crate) fn membership(&self, set: &BTreeSet<usize>) -> Vec<bool> {
        let mut inside = vec![false; self.vertex_count()];
        for &v in set {
            inside[v] = true;
        }
        inside
    }

    /// Weakly connected components of the sub-graph made of `arcs`.
    pub fn components_within(&self, arcs: &[usize]) -> Vec<Vec<usize>> {
        reach::weak_components(self.vertex_count(), arcs.iter().map(|&a| (self.arcs[a].tail, self.arcs[a].head)))
    }

    /// Strong connectivity of the graph induced by the vertices with
    /// `keep[v]`.
    pub fn is_strongly_connected_on(&self, keep: &[bool]) -> bool {
        reach::strongly_connected(
            keep,
            |v| self.out[v].iter().map(|&a| self.arcs[a].head),
            |v| self.inn[v].iter().map(|&a| self.arcs[a].tail),
        )
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.is_strongly_connected_on(&vec![true; self.vertex_count()])
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::graph::{RawArc, RawInstance};
    use alloc::collections::BTreeMap;
    use alloc::vec;

    /// |V|=3, |A_D|=4, |A_*|=2, |K|=2.
    pub(crate) fn appendix_raw() -> RawInstance {
        RawInstance {
            name: "appendix".into(),
            num_agents: 2,
            horizon: 0,
            depot: "1".into(),
            vertices: vec!["1".into(), "2".into(), "3".into()],
            arcs: vec![
                RawArc::new("d1", "1", "2", 2, false),
                RawArc::new("d2", "2", "3", 3, false),
                RawArc::new("d3", "3", "1", 1, false),
                RawArc::new("d4", "2", "1", 2, false),
                RawArc::new("s1", "2", "3", 4, true),
                RawArc::new("s2", "3", "1", 5, true),
            ],
            windows: BTreeMap::new(),
        }
    }

    pub(crate) fn appendix() -> (Instance, ReplicatedGraph) {
        let inst = Instance::from_raw(&appendix_raw()).unwrap();
        let rg = ReplicatedGraph::build(&inst);
        (inst, rg)
    }

    #[test]
    fn appendix_sizes() {
        let (_, rg) = appendix();
        assert_eq!(rg.num_layers(), 3);
        assert_eq!(rg.vertex_count(), 22);
        assert_eq!(rg.arc_count(), 42);
        assert_eq!(rg.category_count(ArcCategory::IntraLayer), 24);
        assert_eq!(rg.category_count(ArcCategory::InterLayer), 8);
        assert_eq!(rg.category_count(ArcCategory::SourceSink), 2);
        assert_eq!(rg.category_count(ArcCategory::SinkSource), 2);
        assert_eq!(rg.category_count(ArcCategory::SourceDepot), 2);
        assert_eq!(rg.category_count(ArcCategory::DepotSink), 4);
        assert!(rg.is_strongly_connected());
    }

    #[test]
    fn index_maps_agree_with_arc_records() {
        let (_, rg) = appendix();
        for k in 0..2 {
            for l in 1..=3 {
                for d in 0..rg.deadheads().len() {
                    let a = rg.arc(rg.intra(d, k, l));
                    assert_eq!(
                        (a.category, a.agent, a.layer, a.base),
                        (ArcCategory::IntraLayer, k, l, Some(rg.deadheads()[d]))
                    );
                }
            }
            for l in 1..3 {
                for s in 0..2 {
                    let a = rg.arc(rg.copy(s, k, l));
                    assert_eq!((a.category, a.agent, a.layer), (ArcCategory::InterLayer, k, l));
                    assert!(matches!(rg.vertex(a.tail), RVertex::Layer { layer, .. } if layer == l));
                    assert!(matches!(rg.vertex(a.head), RVertex::Layer { layer, .. } if layer == l + 1));
                }
            }
            assert_eq!(rg.arc(rg.source_sink(k)).category, ArcCategory::SourceSink);
            assert_eq!(rg.arc(rg.sink_source(k)).head, rg.source((k + 1) % 2));
            assert_eq!(rg.arc(rg.source_depot(k)).head, rg.layer_vertex(VertexId(0), k, 1));
            for l in 2..=3 {
                assert_eq!(rg.arc(rg.depot_sink(k, l)).tail, rg.layer_vertex(VertexId(0), k, l));
            }
        }
        for v in 0..rg.vertex_count() {
            let back = match rg.vertex(v) {
                RVertex::Layer { base, agent, layer } => rg.layer_vertex(base, agent, layer),
                RVertex::Source(k) => rg.source(k),
                RVertex::Sink(k) => rg.sink(k),
            };
            assert_eq!(back, v);
        }
        assert_eq!(rg.copies_of(0).len(), 4);
    }

    #[test]
    fn boundary_examples() {
        let (_, rg) = appendix();
        let empty = rg.boundary(&BTreeSet::new());
        assert_eq!(empty, Boundary::default());

        let all: BTreeSet<usize> = (0..rg.vertex_count()).collect();
        let b = rg.boundary(&all);
        assert!(b.delta_plus.is_empty() && b.delta_minus.is_empty());
        assert_eq!(b.inner.len(), rg.arc_count());

        let v = rg.layer_vertex(VertexId(1), 0, 1);
        let b = rg.boundary(&[v].into_iter().collect());
        assert_eq!(b.delta_plus, rg.out_arcs(v).to_vec());
        assert_eq!(b.delta_minus, rg.in_arcs(v).to_vec());
        assert!(b.inner.is_empty());
    }

    #[test]
    fn components_examples() {
        let (_, rg) = appendix();
        let a = rg.intra(0, 0, 1);
        let c = rg.components_within(&[a]);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].len(), 2);

        let b = rg.intra(0, 1, 2);
        assert_eq!(rg.components_within(&[a, b]).len(), 2);

        // source -> depot -> 2 -> 3
        let path = [rg.source_depot(0), rg.intra(0, 0, 1), rg.intra(1, 0, 1)];
        let c = rg.components_within(&path);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].len(), 4);
    }
}
