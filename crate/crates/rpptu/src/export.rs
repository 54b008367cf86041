//! Debug dumps: the replicated graph as Graphviz DOT and node LPs in CPLEX
//! LP text format.

use std::fmt::Write;

use rpptu_core::lp::{LpProblem, Relation};
use rpptu_core::replicated::{ArcCategory, RVertex};
use rpptu_core::{Instance, ReplicatedGraph};

fn vertex_label(inst: &Instance, rg: &ReplicatedGraph, v: usize) -> String {
    match rg.vertex(v) {
        RVertex::Layer { base, agent, layer } => {
            format!("{} k{} l{}", inst.graph.vertex_name(base), agent + 1, layer)
        }
        RVertex::Source(k) => format!("source k{}", k + 1),
        RVertex::Sink(k) => format!("sink k{}", k + 1),
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT digraph with one cluster per agent. Arcs carry their category and
/// weight as attributes; arcs with positive value in `x` are drawn bold.
pub fn replicated_dot(inst: &Instance, rg: &ReplicatedGraph, x: Option<&[i64]>) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(&format!("{} replicated", inst.name))).unwrap();
    writeln!(out, "  rankdir=LR;").unwrap();
    for k in 0..rg.num_agents() {
        writeln!(out, "  subgraph cluster_k{} {{", k + 1).unwrap();
        writeln!(out, "    label={};", quote(&format!("agent {}", k + 1))).unwrap();
        for v in (0..rg.vertex_count()).filter(|&v| rg.vertex_agent(v) == k) {
            let shape = if rg.is_depot_copy(v) { "doublecircle" } else { "circle" };
            writeln!(out, "    n{v} [label={}, shape={shape}];", quote(&vertex_label(inst, rg, v))).unwrap();
        }
        writeln!(out, "  }}").unwrap();
    }
    for (i, a) in rg.arcs().iter().enumerate() {
        let name = a.base.map(|b| inst.graph.arc(b).name.as_str()).unwrap_or("");
        let style = match a.category {
            ArcCategory::IntraLayer => "solid",
            ArcCategory::InterLayer => "bold",
            _ => "dashed",
        };
        write!(
            out,
            "  n{} -> n{} [id={}, category={}, label={}, weight={}, style={style}",
            a.tail,
            a.head,
            i,
            quote(a.category.label()),
            quote(name),
            a.weight
        )
        .unwrap();
        if let Some(v) = x.map(|x| x[i]).filter(|&v| v > 0) {
            write!(out, ", value={v}, penwidth=3, color=red").unwrap();
        }
        writeln!(out, "];").unwrap();
    }
    out.push_str("}\n");
    out
}

/// Keeps characters the LP format accepts in names.
fn lp_name(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || "_.()[]{}".contains(c) { c } else { '_' }).collect()
}

/// Column name of replicated arc `i` (prefixed with its index, so unique).
pub fn arc_column_name(inst: &Instance, rg: &ReplicatedGraph, i: usize) -> String {
    let a = rg.arc(i);
    let what = match a.base {
        Some(b) => format!("{}_{}", a.category.label(), inst.graph.arc(b).name),
        None => a.category.label().to_string(),
    };
    lp_name(&format!("x{i}_{what}_k{}_l{}", a.agent + 1, a.layer))
}

/// Row names in the order the spatial model adds them: flow balance per
/// replicated vertex, one source row per agent, one service row per service
/// arc, one makespan row per agent, then cuts.
pub fn spatial_row_name(inst: &Instance, rg: &ReplicatedGraph, r: usize) -> String {
    let (nv, nk, ns) = (rg.vertex_count(), rg.num_agents(), rg.services().len());
    let name = if r < nv {
        format!("flow_{}", vertex_label(inst, rg, r))
    } else if r < nv + nk {
        format!("source_k{}", r - nv + 1)
    } else if r < nv + nk + ns {
        format!("serve_{}", inst.graph.arc(rg.services()[r - nv - nk]).name)
    } else if r < nv + 2 * nk + ns {
        format!("makespan_k{}", r - nv - nk - ns + 1)
    } else {
        format!("cut{}", r - nv - 2 * nk - ns + 1)
    };
    lp_name(&name)
}

/// A spatial node LP with readable names; columns past the arcs are named
/// `gamma`.
pub fn spatial_lp_text(inst: &Instance, rg: &ReplicatedGraph, p: &LpProblem) -> String {
    lp_text(
        p,
        &format!("{} spatial LP", inst.name),
        |j| if j < rg.arc_count() { arc_column_name(inst, rg, j) } else { "gamma".into() },
        |r| spatial_row_name(inst, rg, r),
    )
}

fn number(v: f64) -> String {
    format!("{v}")
}

/// CPLEX LP text for a minimisation problem.
pub fn lp_text(p: &LpProblem, title: &str, col: impl Fn(usize) -> String, row: impl Fn(usize) -> String) -> String {
    let mut out = String::new();
    writeln!(out, "\\ {}", title.replace('\n', " ")).unwrap();
    out.push_str("Minimize\n obj:");
    let mut any = false;
    for (j, &c) in p.cost().iter().enumerate().filter(|(_, c)| **c != 0.0) {
        write!(out, " {} {} {}", if c < 0.0 { "-" } else { "+" }, number(c.abs()), col(j)).unwrap();
        any = true;
    }
    if !any {
        out.push_str(" 0 ");
        out.push_str(&col(0));
    }
    out.push_str("\nSubject To\n");
    for (i, r) in p.rows().iter().enumerate() {
        write!(out, " {}:", row(i)).unwrap();
        if r.terms.is_empty() {
            write!(out, " 0 {}", col(0)).unwrap();
        }
        for &(j, a) in &r.terms {
            write!(out, " {} {} {}", if a < 0.0 { "-" } else { "+" }, number(a.abs()), col(j)).unwrap();
        }
        let rel = match r.relation {
            Relation::Eq => "=",
            Relation::Ge => ">=",
            Relation::Le => "<=",
        };
        writeln!(out, " {rel} {}", number(r.rhs)).unwrap();
    }
    out.push_str("Bounds\n");
    for j in 0..p.num_vars() {
        let (lo, hi) = p.bounds(j);
        let name = col(j);
        match (lo.is_finite(), hi.is_finite()) {
            _ if lo == hi => writeln!(out, " {name} = {}", number(lo)).unwrap(),
            (true, true) => writeln!(out, " {} <= {name} <= {}", number(lo), number(hi)).unwrap(),
            (true, false) if lo == 0.0 => {}
            (true, false) => writeln!(out, " {name} >= {}", number(lo)).unwrap(),
            (false, true) => writeln!(out, " -inf <= {name} <= {}", number(hi)).unwrap(),
            (false, false) => writeln!(out, " {name} free").unwrap(),
        }
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use rpptu_core::spatial::{assemble, GammaRows, NodeFixings};

    #[test]
    fn small_lp_text() {
        let mut p = LpProblem::new();
        let a = p.add_var(3.0, 0.0, 1.0);
        let b = p.add_var(-1.0, 0.0, f64::INFINITY);
        p.add_row(vec![(a, 1.0), (b, -2.5)], Relation::Ge, 1.0);
        let text = lp_text(&p, "t", |j| format!("x{j}"), |i| format!("r{i}"));
        assert_eq!(
            text,
            "\\ t\nMinimize\n obj: + 3 x0 - 1 x1\nSubject To\n r0: + 1 x0 - 2.5 x1 >= 1\nBounds\n 0 <= x0 <= 1\nEnd\n"
        );
    }

    #[test]
    fn spatial_names_are_unique_and_cover_every_row() {
        let inst = Instance::from_raw(&fixtures::appendix()).unwrap();
        let rg = ReplicatedGraph::build(&inst);
        let lp = assemble(&rg, &NodeFixings::root(&rg), &[], GammaRows::PerAgent).unwrap();
        let rows: std::collections::BTreeSet<String> =
            (0..lp.problem.num_rows()).map(|r| spatial_row_name(&inst, &rg, r)).collect();
        assert_eq!(rows.len(), lp.problem.num_rows());
        assert!(rows.iter().all(|r| !r.starts_with("cut")));
        let cols: std::collections::BTreeSet<String> =
            (0..rg.arc_count()).map(|j| arc_column_name(&inst, &rg, j)).collect();
        assert_eq!(cols.len(), rg.arc_count());
        let text = spatial_lp_text(&inst, &rg, &lp.problem);
        assert!(text.contains(" makespan_k2:"));
        assert!(text.ends_with("End\n"));
    }

    #[test]
    fn dot_lists_every_arc_once() {
        let inst = Instance::from_raw(&fixtures::appendix()).unwrap();
        let rg = ReplicatedGraph::build(&inst);
        let dot = replicated_dot(&inst, &rg, None);
        assert_eq!(dot.matches(" -> ").count(), rg.arc_count());
        assert_eq!(dot.matches("category=\"inter\"").count(), rg.category_count(ArcCategory::InterLayer));
        assert!(dot.starts_with("digraph") && dot.ends_with("}\n"));
    }
}
