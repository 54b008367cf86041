//! Bundled instances: the three-vertex appendix example and a KTVK-style
//! suburban rail network (Kurla, Thane, Vashi and the junction between them).

use std::collections::BTreeMap;

use rpptu_core::graph::{RawArc, RawInstance, Time};
use rpptu_core::Instance;

pub const APPENDIX_JSON: &str = include_str!("../fixtures/appendix.json");
pub const KTVK_JSON: &str = include_str!("../fixtures/ktvk.json");

/// Three vertices, four deadheads, two service arcs, two agents, no windows.
pub fn appendix() -> RawInstance {
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

/// A directed track between two junctions. `service` lists the segment
/// indices that must be inspected.
struct Line {
    stops: &'static [&'static str],
    minutes: &'static [Time],
    service: &'static [usize],
}

/// Kurla = v1, the junction on the Thane line = v2, Thane = v3, Vashi = v4.
const LINES: [Line; 7] = [
    // Kurla to the junction; the only arc of the line.
    Line { stops: &["v1", "v2"], minutes: &[6], service: &[0] },
    // Up line towards Thane.
    Line { stops: &["v2", "v5", "v6", "v7", "v8", "v3"], minutes: &[3, 3, 2, 3, 3], service: &[] },
    // Down line from Thane back to the junction.
    Line { stops: &["v3", "v9", "v10", "v11", "v12", "v14", "v2"], minutes: &[2, 1, 2, 1, 2, 2], service: &[4] },
    // Junction to Kurla.
    Line { stops: &["v2", "v15", "v16", "v1"], minutes: &[2, 2, 2], service: &[] },
    // Thane to Vashi, single track used in both directions by trains.
    Line {
        stops: &["v3", "v17", "v18", "v19", "v20", "v21", "v22", "v4"],
        minutes: &[4, 5, 4, 5, 4, 4, 4],
        service: &[1, 3, 5],
    },
    // Vashi to Kurla.
    Line {
        stops: &["v4", "v30", "v31", "v32", "v34", "v35", "v36", "v1"],
        minutes: &[5, 5, 5, 6, 5, 5, 4],
        service: &[3],
    },
    // Kurla to Vashi.
    Line {
        stops: &["v1", "v13", "v23", "v24", "v25", "v26", "v27", "v28", "v29", "v33", "v4"],
        minutes: &[2, 3, 3, 2, 2, 3, 2, 3, 3, 2],
        service: &[2, 5, 8],
    },
];

/// Reverse crossovers between adjacent stations; trains never use them.
const CROSSOVERS: [(&str, &str, Time); 6] =
    [("v6", "v5", 3), ("v10", "v9", 1), ("v19", "v18", 4), ("v25", "v24", 2), ("v31", "v30", 5), ("v36", "v35", 5)];

/// Which way a train runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Service {
    /// Kurla to Thane via the junction.
    KurlaThane,
    /// Thane to Kurla via the junction.
    ThaneKurla,
    KurlaVashi,
    VashiKurla,
    ThaneVashi,
    VashiThane,
}

impl Service {
    pub const ALL: [Service; 6] = [
        Service::KurlaThane,
        Service::ThaneKurla,
        Service::KurlaVashi,
        Service::VashiKurla,
        Service::ThaneVashi,
        Service::VashiThane,
    ];

    /// Arc ids in running order.
    fn arcs(self) -> Vec<String> {
        let on = |lines: &[usize]| lines.iter().flat_map(|&l| line_arcs(&LINES[l])).collect::<Vec<_>>();
        match self {
            Service::KurlaThane => on(&[0, 1]),
            Service::ThaneKurla => on(&[2, 3]),
            Service::KurlaVashi => on(&[6]),
            Service::VashiKurla => on(&[5]),
            Service::ThaneVashi => on(&[4]),
            Service::VashiThane => on(&[4]).into_iter().rev().collect(),
        }
    }
}

/// Periodic departures of one train pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrainRun {
    pub service: Service,
    /// Minutes after the start of each period.
    pub departures: Vec<Time>,
    /// Fast trains occupy each section for half its running time (rounded up).
    pub fast: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Timetable {
    pub period: Time,
    pub periods: Time,
    pub runs: Vec<TrainRun>,
}

impl Timetable {
    /// The bundled schedule: fast and slow Kurla–Thane trains, slow
    /// Kurla–Vashi and Thane–Vashi trains, each running both ways.
    pub fn bundled() -> Self {
        let run = |service, departures: &[Time], fast| TrainRun { service, departures: departures.to_vec(), fast };
        Timetable {
            period: 74,
            periods: 3,
            runs: vec![
                run(Service::KurlaThane, BUNDLED[0], true),
                run(Service::ThaneKurla, BUNDLED[1], true),
                run(Service::KurlaThane, BUNDLED[2], false),
                run(Service::ThaneKurla, BUNDLED[3], false),
                run(Service::KurlaVashi, BUNDLED[4], false),
                run(Service::VashiKurla, BUNDLED[5], false),
                run(Service::ThaneVashi, BUNDLED[6], false),
                run(Service::VashiThane, BUNDLED[7], false),
            ],
        }
    }

    pub fn horizon(&self) -> Time {
        self.period * self.periods
    }
}

/// Departure minutes of the bundled timetable, in the order of
/// [`Timetable::bundled`].
const BUNDLED: [&[Time]; 8] = [
    &[16, 29, 50],
    &[2, 22],
    &[1, 9, 21, 40, 44, 70],
    &[4, 46, 53, 71],
    &[15, 21, 33, 48],
    &[13, 27, 29],
    &[4, 13, 36, 65, 71],
    &[21, 30, 49, 61, 73],
];

fn line_arcs(line: &Line) -> Vec<String> {
    line.stops.windows(2).map(|p| format!("{}-{}", p[0], p[1])).collect()
}

fn parallel_id(arc: &str) -> String {
    format!("{arc}/dh")
}

/// The network with windows from `timetable`.
pub fn ktvk(timetable: &Timetable, num_agents: usize) -> RawInstance {
    let vertices: Vec<String> = (1..=36).map(|i| format!("v{i}")).collect();
    let mut arcs = Vec::new();
    let mut parallels = Vec::new();
    let mut weight = BTreeMap::new();
    for line in &LINES {
        for (i, (id, &w)) in line_arcs(line).iter().zip(line.minutes).enumerate() {
            let service = line.service.contains(&i);
            arcs.push(RawArc::new(id, line.stops[i], line.stops[i + 1], w, service));
            if service {
                parallels.push(RawArc::new(&parallel_id(id), line.stops[i], line.stops[i + 1], w, false));
            }
            weight.insert(id.clone(), w);
        }
    }
    for (tail, head, w) in CROSSOVERS {
        arcs.push(RawArc::new(&format!("{tail}-{head}"), tail, head, w, false));
    }
    let has_parallel: Vec<String> = parallels.iter().map(|a| a.id.clone()).collect();
    arcs.extend(parallels);

    let horizon = timetable.horizon();
    let mut spans: BTreeMap<String, Vec<[Time; 2]>> = BTreeMap::new();
    for run in &timetable.runs {
        let route = run.service.arcs();
        let occupy = |w: Time| if run.fast { (w + 1) / 2 } else { w };
        let trip: Time = route.iter().map(|a| occupy(weight[a])).sum();
        for &dep in &run.departures {
            // Earlier periods' trains may still be on the line at time 0.
            let mut start = dep - timetable.period * (1 + trip / timetable.period);
            while start < horizon {
                let mut t = start;
                for a in &route {
                    let occ = occupy(weight[a]);
                    let (lo, hi) = (t.max(0), (t + occ).min(horizon));
                    if lo < hi {
                        spans.entry(a.clone()).or_default().push([lo, hi]);
                    }
                    t += occ;
                }
                start += timetable.period;
            }
        }
    }
    let mut windows = BTreeMap::new();
    for (arc, list) in spans {
        let merged = merge(list);
        if has_parallel.contains(&parallel_id(&arc)) {
            windows.insert(parallel_id(&arc), merged.clone());
        }
        windows.insert(arc, merged);
    }

    RawInstance { name: "ktvk".into(), num_agents, horizon, depot: "v1".into(), vertices, arcs, windows }
}

/// Union of closed spans; touching spans merge.
fn merge(mut spans: Vec<[Time; 2]>) -> Vec<[Time; 2]> {
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

/// One of the three round trips from Kurla that every KTVK tour is built
/// from: each must be driven at least once to cover the service arcs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum RoundTrip {
    /// Up to Thane and back down through the junction.
    Thane,
    /// Up to Thane, across to Vashi, back to Kurla.
    Triangle,
    /// Out to Vashi and back.
    Vashi,
}

impl RoundTrip {
    pub const ALL: [RoundTrip; 3] = [RoundTrip::Thane, RoundTrip::Triangle, RoundTrip::Vashi];

    fn lines(self) -> &'static [usize] {
        match self {
            RoundTrip::Thane => &[0, 1, 2, 3],
            RoundTrip::Triangle => &[0, 1, 4, 5],
            RoundTrip::Vashi => &[6, 5],
        }
    }
}

/// Timing of one agent's round trips from time 0, leaving each vertex as
/// early as the windows allow. Returns (fuel, finish).
pub fn time_round_trips(inst: &Instance, trips: &[RoundTrip]) -> (Time, Time) {
    let g = &inst.graph;
    let mut t = 0;
    let mut fuel = 0;
    for trip in trips {
        for &l in trip.lines() {
            for id in line_arcs(&LINES[l]) {
                let a = g.arc_by_name(&id).expect("KTVK arc");
                t = inst.traverse(a, t);
                fuel += g.arc(a).weight;
            }
        }
    }
    (fuel, t)
}

/// A two-agent plan made of round trips.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripPlan {
    pub cost: Time,
    pub trips: [Vec<RoundTrip>; 2],
    /// (finish, waiting) per agent.
    pub timing: [(Time, Time); 2],
}

/// Every way to split the three round trips between two agents and order
/// them, cheapest first; ties keep enumeration order.
pub fn round_trip_plans(inst: &Instance) -> Vec<TripPlan> {
    let mut plans = Vec::new();
    for mask in 0u8..8 {
        let mine = |k: u8| -> Vec<RoundTrip> {
            RoundTrip::ALL.iter().enumerate().filter(|(i, _)| (mask >> i) & 1 == k).map(|(_, &r)| r).collect()
        };
        for first in permutations(&mine(0)) {
            for second in permutations(&mine(1)) {
                let (f0, t0) = time_round_trips(inst, &first);
                let (f1, t1) = time_round_trips(inst, &second);
                plans.push(TripPlan {
                    cost: f0 + f1 + t0.max(t1),
                    timing: [(t0, t0 - f0), (t1, t1 - f1)],
                    trips: [first.clone(), second],
                });
            }
        }
    }
    plans.sort_by_key(|p| p.cost);
    plans
}

fn permutations(items: &[RoundTrip]) -> Vec<Vec<RoundTrip>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}


#[cfg(test)]
mod files {
    use super::*;
    use crate::io::instance_json;

    /// Set `RPPTU_BLESS=1` to rewrite the bundled files from the builders.
    fn check(path: &str, bundled: &str, raw: &RawInstance) {
        let fresh = instance_json(&Instance::from_raw(raw).unwrap());
        if std::env::var_os("RPPTU_BLESS").is_some() {
            std::fs::write(std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join(path), &fresh).unwrap();
            return;
        }
        assert!(bundled == fresh, "{path} is stale; rerun with RPPTU_BLESS=1");
    }

    #[test]
    fn bundled_files_match_builders() {
        check("fixtures/appendix.json", APPENDIX_JSON, &appendix());
        check("fixtures/ktvk.json", KTVK_JSON, &ktvk(&Timetable::bundled(), 2));
    }
}
