//! Seeded random instances: a Hamiltonian cycle plus random extra arcs, a
//! random service subset, and periodic train occupation on the cycle arcs.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Instance, InstanceError, RawArc, RawInstance, Time};
use crate::reach;

#[derive(Clone, Debug, PartialEq)]
pub struct GenConfig {
    pub num_vertices: usize,
    /// Arcs per vertex before parallels are added; at least 1.
    pub arc_ratio: f64,
    /// Fraction of arcs that need service.
    pub beta: f64,
    /// Overrides `beta` with an exact service count.
    pub num_services: Option<usize>,
    pub num_agents: usize,
    pub seed: u64,
    pub period: Time,
    pub num_trains: usize,
    /// Horizon in periods.
    pub periods: Time,
    /// Extra blocked minutes on each side of a train's occupation.
    pub window_margin: Time,
    /// Whether cycle arcs get train windows at all.
    pub trains: bool,
    pub min_weight: Time,
    pub max_weight: Time,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            num_vertices: 20,
            arc_ratio: 1.2,
            beta: 0.3,
            num_services: None,
            num_agents: 2,
            seed: 0,
            period: 74,
            num_trains: 2,
            periods: 3,
            window_margin: 0,
            trains: true,
            min_weight: 1,
            max_weight: 10,
        }
    }
}

impl GenConfig {
    /// Arc count before parallels.
    pub fn base_arc_count(&self) -> usize {
        (libm::round(self.arc_ratio * self.num_vertices as f64) as usize).max(self.num_vertices)
    }

    pub fn service_count(&self) -> usize {
        self.num_services
            .unwrap_or_else(|| libm::round(self.beta * self.base_arc_count() as f64) as usize)
            .clamp(1, self.base_arc_count())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("need at least 2 vertices")]
    TooFewVertices,
    #[error("{0} arcs do not fit on distinct vertex pairs")]
    TooManyArcs(usize),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

pub fn generate(cfg: &GenConfig) -> Result<Instance, GenError> {
    Ok(Instance::from_raw(&generate_raw(cfg)?)?)
}

pub fn generate_raw(cfg: &GenConfig) -> Result<RawInstance, GenError> {
    let n = cfg.num_vertices;
    if n < 2 {
        return Err(GenError::TooFewVertices);
    }
    let total = cfg.base_arc_count();
    if total > n * (n - 1) {
        return Err(GenError::TooManyArcs(total));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let name = |v: usize| (v + 1).to_string();
    let weight = |rng: &mut ChaCha8Rng| rng.gen_range(cfg.min_weight..=cfg.max_weight);

    let mut order: Vec<usize> = (0..n).collect();
    order[1..].shuffle(&mut rng);
    let mut pairs: Vec<(usize, usize)> = (0..n).map(|i| (order[i], order[(i + 1) % n])).collect();
    let mut used: BTreeSet<(usize, usize)> = pairs.iter().copied().collect();
    while pairs.len() < total {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v && used.insert((u, v)) {
            pairs.push((u, v));
        }
    }
    let weights: Vec<Time> = pairs.iter().map(|_| weight(&mut rng)).collect();
    let mut service = alloc::vec![false; total];
    for i in index::sample(&mut rng, total, cfg.service_count()) {
        service[i] = true;
    }

    let mut arcs: Vec<RawArc> = pairs
        .iter()
        .zip(&weights)
        .enumerate()
        .map(|(i, (&(u, v), &w))| RawArc::new(&format!("a{}", i + 1), &name(u), &name(v), w, service[i]))
        .collect();

    // Parallel deadheads, cycle services first, until deadheads connect.
    let mut deadhead: Vec<bool> = service.iter().map(|&s| !s).collect();
    let mut parallel_of = Vec::new();
    for i in (0..total).filter(|&i| service[i]) {
        if deadheads_connected(n, &pairs, &deadhead) {
            break;
        }
        deadhead[i] = true;
        parallel_of.push(i);
    }
    for &i in &parallel_of {
        let (u, v) = pairs[i];
        arcs.push(RawArc::new(&format!("p{}", i + 1), &name(u), &name(v), weights[i], false));
    }

    let horizon = cfg.period * cfg.periods;
    let mut windows: BTreeMap<String, Vec<[Time; 2]>> = BTreeMap::new();
    if cfg.trains && cfg.num_trains > 0 {
        let phase = rng.gen_range(0..cfg.period);
        let cycle_len: Time = weights[..n].iter().sum();
        for i in 0..n {
            let mut spans = Vec::new();
            let offset: Time = weights[..i].iter().sum();
            for j in 0..cfg.num_trains {
                let base = phase + j as Time * cfg.period / cfg.num_trains as Time;
                // Trains that started before time 0 may still be on the cycle.
                let mut start = base - cfg.period * (1 + cycle_len / cfg.period);
                while start < horizon {
                    let lo = (start + offset - cfg.window_margin).max(0);
                    let hi = (start + offset + weights[i] + cfg.window_margin).min(horizon);
                    if lo < hi {
                        spans.push([lo, hi]);
                    }
                    start += cfg.period;
                }
            }
            let merged = merge_spans(spans);
            if merged.is_empty() {
                continue;
            }
            windows.insert(arcs[i].id.clone(), merged.clone());
            if parallel_of.contains(&i) {
                windows.insert(format!("p{}", i + 1), merged);
            }
        }
    }

    Ok(RawInstance {
        name: format!("gen-v{}-s{}", n, cfg.seed),
        num_agents: cfg.num_agents,
        horizon,
        depot: name(0),
        vertices: (0..n).map(name).collect(),
        arcs,
        windows,
    })
}

fn deadheads_connected(n: usize, pairs: &[(usize, usize)], deadhead: &[bool]) -> bool {
    let mut succ = alloc::vec![Vec::new(); n];
    let mut pred = alloc::vec![Vec::new(); n];
    for (i, &(u, v)) in pairs.iter().enumerate() {
        if deadhead[i] {
            succ[u].push(v);
            pred[v].push(u);
        }
    }
    let active = alloc::vec![true; n];
    reach::strongly_connected(&active, |v| succ[v].clone(), |v| pred[v].clone())
}

/// Sorted union of closed spans (touching spans merge).
fn merge_spans(mut spans: Vec<[Time; 2]>) -> Vec<[Time; 2]> {
    spans.sort_unstable();
    let mut out: Vec<[Time; 2]> = Vec::new();
    for s in spans {
        match out.last_mut() {
            Some(last) if s[0] <= last[1] => last[1] = last[1].max(s[1]),
            _ => out.push(s),
        }
    }
    out
}

/// Number of parallel deadheads added by the generator.
pub fn parallel_count(raw: &RawInstance) -> usize {
    raw.arcs.iter().filter(|a| a.id.starts_with('p')).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_follow_ratios() {
        let cfg = GenConfig { num_vertices: 20, arc_ratio: 1.2, beta: 0.3, seed: 3, ..Default::default() };
        let raw = generate_raw(&cfg).unwrap();
        assert_eq!(raw.arcs.len() - parallel_count(&raw), 24);
        assert_eq!(raw.arcs.iter().filter(|a| a.service).count(), 7);
        Instance::from_raw(&raw).unwrap();
    }

    #[test]
    fn seeded_reproducible() {
        let cfg = GenConfig { num_vertices: 8, seed: 11, ..Default::default() };
        assert_eq!(generate_raw(&cfg).unwrap(), generate_raw(&cfg).unwrap());
    }

    #[test]
    fn windows_only_on_cycle_arcs() {
        for seed in 0..20 {
            let cfg = GenConfig { num_vertices: 6, arc_ratio: 2.0, beta: 0.5, seed, ..Default::default() };
            let raw = generate_raw(&cfg).unwrap();
            for id in raw.windows.keys() {
                let idx: usize = id[1..].parse().unwrap();
                assert!(idx <= 6, "{id}");
            }
            Instance::from_raw(&raw).unwrap();
        }
    }

    #[test]
    fn spans_merge() {
        assert_eq!(merge_spans(alloc::vec![[5, 9], [1, 3], [3, 4], [8, 12]]), alloc::vec![[1, 4], [5, 12]]);
    }
}
