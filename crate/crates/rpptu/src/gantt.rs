//! Plain-text Gantt chart of a solution.
//!
//! One bar per agent over `[0, makespan]`: `#` servicing, `=` deadheading,
//! `.` waiting, blank once the agent is back at the depot.

use std::fmt::Write;

use crate::io::SolutionRecord;

pub fn render(sol: &SolutionRecord, width: usize) -> String {
    let width = width.max(10);
    let end = sol.per_agent.iter().map(|a| a.finish).max().unwrap_or(0).max(1);
    // Column c covers [c*end/width, (c+1)*end/width).
    let cell = |t: i64| ((t as u128 * width as u128) / end as u128) as usize;
    let mut out = String::new();
    for a in &sol.per_agent {
        let mut bar = vec![' '; width];
        let mut mark = |from: i64, to: i64, ch: char| {
            if to > from {
                let (lo, hi) = (cell(from), cell(to).max(cell(from) + 1).min(width));
                for c in &mut bar[lo..hi] {
                    // Service beats deadheading beats waiting when they share a column.
                    let rank = |c: char| "# =.".find(c).map_or(9, |i| i);
                    if rank(ch) < rank(*c) || *c == ' ' {
                        *c = ch;
                    }
                }
            }
        };
        for s in &a.steps {
            mark(s.depart - s.wait_before, s.depart, '.');
            mark(s.depart, s.arrive, if s.service { '#' } else { '=' });
        }
        let bar: String = bar.into_iter().collect();
        writeln!(out, "agent {:>2} |{bar}| finish {} wait {} fuel {}", a.agent, a.finish, a.waiting, a.fuel).unwrap();
    }
    writeln!(out, "          0{:>w$}", end, w = width + 1).unwrap();
    for a in &sol.per_agent {
        writeln!(out, "agent {}:", a.agent).unwrap();
        for s in &a.steps {
            let kind = if s.service { "service" } else { "deadhead" };
            writeln!(out, "  {:>5} -> {:>5}  {:<12} {kind}  (waited {})", s.depart, s.arrive, s.arc, s.wait_before)
                .unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{AgentRecord, StatsRecord, StepRecord};

    fn step(arc: &str, service: bool, depart: i64, arrive: i64, wait_before: i64) -> StepRecord {
        StepRecord { arc: arc.into(), service, depart, arrive, wait_before }
    }

    #[test]
    fn bars_scale_to_the_makespan() {
        let sol = SolutionRecord {
            instance: "t".into(),
            status: "optimal".into(),
            objective: Some(0),
            fuel: Some(0),
            gamma: Some(20),
            per_agent: vec![
                AgentRecord {
                    agent: 1,
                    steps: vec![step("a", false, 0, 5, 0), step("s", true, 10, 20, 5)],
                    finish: 20,
                    waiting: 5,
                    fuel: 15,
                },
                AgentRecord { agent: 2, steps: vec![step("b", false, 0, 10, 0)], finish: 10, waiting: 0, fuel: 10 },
            ],
            stats: StatsRecord {
                nodes: 1,
                cuts: 0,
                lp_solves: 1,
                lp_iterations: 0,
                max_depth: 0,
                best_lb: None,
                best_ub: None,
                wall_ms: 0,
            },
        };
        let text = render(&sol, 20);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "agent  1 |=====.....##########| finish 20 wait 5 fuel 15");
        assert_eq!(lines[1], "agent  2 |==========          | finish 10 wait 0 fuel 10");
        assert!(text.contains("s            service  (waited 5)"));
    }
}
