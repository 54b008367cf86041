//! Batch runs over generator cells, with and without cuts.

use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use rpptu_core::bnc::{solve_with, BncConfig, Status};
use rpptu_core::gen::{generate, GenConfig};
use rpptu_core::lp::RevisedSimplex;
use serde::Serialize;

use crate::clock::WallClock;

/// One generator setting: service ratio, vertex count, arc-to-vertex ratio.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub beta: f64,
    pub vertices: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CellError {
    #[error("cell `{0}` is not beta:vertices:ratio")]
    Shape(String),
    #[error("cell `{cell}`: bad {field}")]
    Field { cell: String, field: &'static str },
}

impl FromStr for Cell {
    type Err = CellError;

    /// `beta:vertices:ratio`, e.g. `0.5:8:1.6`.
    fn from_str(s: &str) -> Result<Self, CellError> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let [beta, vertices, ratio] = parts[..] else {
            return Err(CellError::Shape(s.into()));
        };
        let bad = |field| CellError::Field { cell: s.into(), field };
        let beta: f64 = beta.parse().map_err(|_| bad("beta"))?;
        let vertices: usize = vertices.parse().map_err(|_| bad("vertex count"))?;
        let ratio: f64 = ratio.parse().map_err(|_| bad("ratio"))?;
        if !(0.0..=1.0).contains(&beta) {
            return Err(bad("beta"));
        }
        if vertices < 2 {
            return Err(bad("vertex count"));
        }
        if ratio.is_nan() || ratio < 1.0 {
            return Err(bad("ratio"));
        }
        Ok(Cell { beta, vertices, ratio })
    }
}

/// Comma-separated cells; `grid:V` expands to the nine beta × ratio
/// combinations at `V` vertices.
pub fn parse_cells(spec: &str) -> Result<Vec<Cell>, CellError> {
    let mut out = Vec::new();
    for part in spec.split(',').filter(|p| !p.trim().is_empty()) {
        if let Some(v) = part.trim().strip_prefix("grid:") {
            let vertices = v.parse().map_err(|_| CellError::Field { cell: part.into(), field: "vertex count" })?;
            for beta in [0.3, 0.5, 0.7] {
                for ratio in [1.2, 1.6, 2.0] {
                    out.push(Cell { beta, vertices, ratio });
                }
            }
        } else {
            out.push(part.parse()?);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct BatchConfig {
    /// Instances per cell.
    pub count: usize,
    /// Instance `i` of every cell uses seed `seed + i`.
    pub seed: u64,
    pub agents: usize,
    /// Solver settings; `cuts` is overridden per variant.
    pub solver: BncConfig,
    /// Generator settings other than the cell's.
    pub template: GenConfig,
}

impl Default for BatchConfig {
    fn default() -> Self {
        BatchConfig { count: 30, seed: 0, agents: 2, solver: BncConfig::default(), template: GenConfig::default() }
    }
}

/// One CSV line: a cell under one solver variant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchRow {
    pub beta: f64,
    #[serde(rename = "V")]
    pub vertices: usize,
    #[serde(rename = "A")]
    pub arcs: usize,
    pub variant: &'static str,
    /// Instances solved to optimality within budget.
    #[serde(rename = "OPT")]
    pub opt: usize,
    #[serde(rename = "NODES")]
    pub nodes: f64,
    #[serde(rename = "TIME_s")]
    pub time_s: f64,
    #[serde(rename = "nCP")]
    pub cuts: f64,
    /// Instances that failed to generate or solve; excluded from the means.
    #[serde(skip)]
    pub failures: usize,
}

/// Outcome of one solve inside a batch.
#[derive(Clone, Debug, PartialEq)]
pub struct Run {
    pub optimal: bool,
    pub objective: Option<i64>,
    pub nodes: usize,
    pub cuts: usize,
    pub seconds: f64,
}

pub const VARIANTS: [(&str, bool); 2] = [("cuts", true), ("no-cuts", false)];

fn gen_config(cell: Cell, cfg: &BatchConfig, i: usize) -> GenConfig {
    GenConfig {
        num_vertices: cell.vertices,
        arc_ratio: cell.ratio,
        beta: cell.beta,
        num_services: None,
        num_agents: cfg.agents,
        seed: cfg.seed.wrapping_add(i as u64),
        ..cfg.template.clone()
    }
}

fn run_one(cell: Cell, cfg: &BatchConfig, i: usize, cuts: bool) -> Result<Run, String> {
    let inst = generate(&gen_config(cell, cfg, i)).map_err(|e| e.to_string())?;
    let solver = BncConfig { cuts, ..cfg.solver.clone() };
    let clock = WallClock::start();
    let started = Instant::now();
    let sol = solve_with(&inst, &solver, &clock, &mut (), &RevisedSimplex::default()).map_err(|e| e.to_string())?;
    Ok(Run {
        optimal: sol.status == Status::Optimal,
        objective: sol.objective,
        nodes: sol.stats.nodes,
        cuts: sol.stats.cuts,
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// Every run of the batch, indexed `[cell][variant][instance]`. Solves run in
/// parallel; the layout depends only on the inputs.
pub fn run_all(cells: &[Cell], cfg: &BatchConfig) -> Vec<[Vec<Result<Run, String>>; 2]> {
    let jobs: Vec<(usize, usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..VARIANTS.len()).flat_map(move |v| (0..cfg.count).map(move |i| (c, v, i))))
        .collect();
    let results: Vec<Result<Run, String>> =
        jobs.par_iter().map(|&(c, v, i)| run_one(cells[c], cfg, i, VARIANTS[v].1)).collect();
    let mut it = results.into_iter();
    cells.iter().map(|_| std::array::from_fn(|_| it.by_ref().take(cfg.count).collect())).collect()
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

pub fn summarize(cell: Cell, variant: &'static str, runs: &[Result<Run, String>], template: &GenConfig) -> BatchRow {
    let ok: Vec<&Run> = runs.iter().filter_map(|r| r.as_ref().ok()).collect();
    let arcs = GenConfig { num_vertices: cell.vertices, arc_ratio: cell.ratio, ..template.clone() }.base_arc_count();
    BatchRow {
        beta: cell.beta,
        vertices: cell.vertices,
        arcs,
        variant,
        opt: ok.iter().filter(|r| r.optimal).count(),
        nodes: mean(ok.iter().map(|r| r.nodes as f64)),
        time_s: mean(ok.iter().map(|r| r.seconds)),
        cuts: mean(ok.iter().map(|r| r.cuts as f64)),
        failures: runs.len() - ok.len(),
    }
}

/// Two rows per cell (with cuts, then without); empty when `count` is 0.
pub fn run_batch(cells: &[Cell], cfg: &BatchConfig) -> Vec<BatchRow> {
    if cfg.count == 0 {
        return Vec::new();
    }
    let all = run_all(cells, cfg);
    let mut rows = Vec::new();
    for (cell, per_variant) in cells.iter().zip(&all) {
        for ((name, _), runs) in VARIANTS.iter().zip(per_variant) {
            for e in runs.iter().filter_map(|r| r.as_ref().err()) {
                log::warn!("cell {cell:?} variant {name}: {e}");
            }
            rows.push(summarize(*cell, name, runs, &cfg.template));
        }
    }
    rows
}

pub fn write_csv<W: std::io::Write>(rows: &[BatchRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(["beta", "V", "A", "variant", "OPT", "NODES", "TIME_s", "nCP"])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_parse() {
        assert_eq!("0.5:8:1.6".parse::<Cell>().unwrap(), Cell { beta: 0.5, vertices: 8, ratio: 1.6 });
        assert!("0.5:8".parse::<Cell>().is_err());
        assert!("1.5:8:1.6".parse::<Cell>().is_err());
        assert!("0.5:8:0.9".parse::<Cell>().is_err());
        assert_eq!(parse_cells("grid:20").unwrap().len(), 9);
        assert_eq!(parse_cells("0.3:5:1.2, 0.7:6:2").unwrap().len(), 2);
    }

    #[test]
    fn zero_count_gives_empty_table() {
        let cells = parse_cells("0.5:5:1.6").unwrap();
        let rows = run_batch(&cells, &BatchConfig { count: 0, ..BatchConfig::default() });
        assert!(rows.is_empty());
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "beta,V,A,variant,OPT,NODES,TIME_s,nCP\n");
    }

    #[test]
    fn unit_node_budget_keeps_every_row() {
        let cells = parse_cells("0.5:5:1.6,0.3:6:1.2").unwrap();
        let cfg = BatchConfig {
            count: 4,
            solver: BncConfig { node_budget: 1, ..BncConfig::default() },
            ..BatchConfig::default()
        };
        let rows = run_batch(&cells, &cfg);
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.opt <= 4 && r.failures == 0));
        assert_eq!(rows[0].arcs, 8);
        assert_eq!(rows[1].variant, "no-cuts");
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("beta,V,A,variant,OPT,NODES,TIME_s,nCP\n0.5,5,8,cuts,"));
    }
}
