//! Sparse LU factorisation of a set of basis columns.
//!
//! Right-looking elimination on rows with Markowitz-style pivot choice:
//! column singletons first, then row singletons, then the sparsest column with
//! a threshold test on pivot size. Columns that never find an acceptable pivot
//! are reported instead of failing, so callers can patch the basis with slacks.

use alloc::vec;
use alloc::vec::Vec;

const ZERO_TOL: f64 = 1e-11;
const DROP_TOL: f64 = 1e-14;
/// A pivot must be at least this fraction of the largest entry in its column.
const THRESHOLD: f64 = 0.1;

#[derive(Clone, Debug)]
struct Step {
    row: usize,
    col: usize,
    pivot: f64,
    /// Rows eliminated by this pivot with their multipliers.
    lower: Vec<(usize, f64)>,
    /// Off-pivot entries of the pivot row, by column.
    upper: Vec<(usize, f64)>,
}

#[derive(Clone, Debug)]
pub(super) struct Lu {
    m: usize,
    steps: Vec<Step>,
}

#[derive(Clone, Debug)]
pub(super) struct Factored {
    pub lu: Lu,
    /// Rows with no pivot, ascending.
    pub missing_rows: Vec<usize>,
    /// Columns (by position in the input) with no pivot, ascending.
    pub missing_cols: Vec<usize>,
}

/// Factorises the `m`-row matrix whose columns are `columns`.
pub(super) fn factor(m: usize, columns: &[&[(usize, f64)]]) -> Factored {
    let n = columns.len();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (c, col) in columns.iter().enumerate() {
        for &(r, v) in col.iter() {
            if v.abs() > DROP_TOL {
                match rows[r].iter_mut().find(|(cc, _)| *cc == c) {
                    Some(e) => e.1 += v,
                    None => {
                        rows[r].push((c, v));
                        col_rows[c].push(r);
                    }
                }
            }
        }
    }
    let mut col_count: Vec<usize> = col_rows.iter().map(Vec::len).collect();
    let mut row_done = vec![false; m];
    let mut col_done = vec![false; n];
    let mut dead_col = vec![false; n];
    let mut steps = Vec::with_capacity(m.min(n));

    let entry = |rows: &[Vec<(usize, f64)>], r: usize, c: usize| -> Option<f64> {
        rows[r].iter().find(|(cc, _)| *cc == c).map(|&(_, v)| v)
    };

    loop {
        // Active entries of column c: (row, value).
        let active = |rows: &[Vec<(usize, f64)>], col_rows: &[Vec<usize>], c: usize| -> Vec<(usize, f64)> {
            col_rows[c].iter().filter(|&&r| !row_done[r]).filter_map(|&r| entry(rows, r, c).map(|v| (r, v))).collect()
        };
        let mut choice: Option<(usize, usize)> = None;

        // Column singletons need no elimination at all.
        for c in (0..n).filter(|&c| !col_done[c] && !dead_col[c] && col_count[c] == 1) {
            let a = active(&rows, &col_rows, c);
            if let [(r, v)] = a[..] {
                if v.abs() > ZERO_TOL {
                    choice = Some((r, c));
                    break;
                }
            }
        }
        if choice.is_none() {
            for r in (0..m).filter(|&r| !row_done[r] && rows[r].len() == 1) {
                let (c, v) = rows[r][0];
                if col_done[c] || dead_col[c] || v.abs() <= ZERO_TOL {
                    continue;
                }
                let big = active(&rows, &col_rows, c).iter().fold(0.0f64, |b, &(_, w)| b.max(w.abs()));
                if v.abs() >= THRESHOLD * big {
                    choice = Some((r, c));
                    break;
                }
            }
        }
        if choice.is_none() {
            let mut best: Option<(usize, usize, usize)> = None; // (cost, row, col)
            for c in 0..n {
                if col_done[c] || dead_col[c] {
                    continue;
                }
                let a = active(&rows, &col_rows, c);
                let big = a.iter().fold(0.0f64, |b, &(_, w)| b.max(w.abs()));
                if big <= ZERO_TOL {
                    dead_col[c] = true;
                    continue;
                }
                for &(r, v) in &a {
                    if v.abs() < THRESHOLD * big {
                        continue;
                    }
                    let cost = (a.len() - 1) * (rows[r].len() - 1);
                    if best.is_none_or(|(b, _, _)| cost < b) {
                        best = Some((cost, r, c));
                    }
                }
                if best.is_some_and(|(b, _, _)| b == 0) {
                    break;
                }
            }
            choice = best.map(|(_, r, c)| (r, c));
        }
        let Some((r, c)) = choice else { break };

        let pivot_row = core::mem::take(&mut rows[r]);
        let pivot = pivot_row.iter().find(|(cc, _)| *cc == c).map(|&(_, v)| v).expect("pivot entry");
        let upper: Vec<(usize, f64)> = pivot_row.iter().copied().filter(|&(cc, _)| cc != c).collect();
        row_done[r] = true;
        col_done[c] = true;
        for &(cc, _) in &upper {
            col_count[cc] -= 1;
        }

        let mut lower = Vec::new();
        let targets: Vec<usize> = col_rows[c].iter().copied().filter(|&i| !row_done[i]).collect();
        for i in targets {
            let Some(pos) = rows[i].iter().position(|(cc, _)| *cc == c) else { continue };
            let (_, v) = rows[i].swap_remove(pos);
            let mult = v / pivot;
            lower.push((i, mult));
            for &(cc, u) in &upper {
                match rows[i].iter().position(|(x, _)| *x == cc) {
                    Some(p) => {
                        rows[i][p].1 -= mult * u;
                        if rows[i][p].1.abs() <= DROP_TOL {
                            rows[i].swap_remove(p);
                            col_count[cc] -= 1;
                        }
                    }
                    None => {
                        let fill = -mult * u;
                        if fill.abs() > DROP_TOL {
                            rows[i].push((cc, fill));
                            col_rows[cc].push(i);
                            col_count[cc] += 1;
                        }
                    }
                }
            }
        }
        steps.push(Step { row: r, col: c, pivot, lower, upper });
    }

    Factored {
        lu: Lu { m, steps },
        missing_rows: (0..m).filter(|&r| !row_done[r]).collect(),
        missing_cols: (0..n).filter(|&c| !col_done[c]).collect(),
    }
}

impl Lu {
    /// Placeholder until the first factorisation.
    pub fn empty() -> Self {
        Lu { m: 0, steps: Vec::new() }
    }

    /// Solves `B z = rhs` for a complete factorisation; `rhs` is consumed.
    /// `z` is indexed by column position.
    pub fn solve(&self, rhs: &mut [f64], z: &mut [f64]) {
        debug_assert_eq!(rhs.len(), self.m);
        for s in &self.steps {
            let b = rhs[s.row];
            if b != 0.0 {
                for &(i, l) in &s.lower {
                    rhs[i] -= l * b;
                }
            }
        }
        for s in self.steps.iter().rev() {
            let mut v = rhs[s.row];
            for &(c, u) in &s.upper {
                v -= u * z[c];
            }
            z[s.col] = v / s.pivot;
        }
    }

    /// Solves `z^T B = rhs^T`, with `rhs` indexed by column position and the
    /// result by row.
    pub fn solve_transposed(&self, rhs: &[f64], z: &mut [f64]) {
        // U^T w = rhs in pivot order; w lives on pivot rows.
        let mut acc = rhs.to_vec();
        z.iter_mut().for_each(|v| *v = 0.0);
        for s in &self.steps {
            let v = acc[s.col] / s.pivot;
            z[s.row] = v;
            if v != 0.0 {
                for &(c, u) in &s.upper {
                    acc[c] -= u * v;
                }
            }
        }
        // Undo the row eliminations in reverse.
        for s in self.steps.iter().rev() {
            let mut v = z[s.row];
            for &(i, l) in &s.lower {
                v -= l * z[i];
            }
            z[s.row] = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat_vec(cols: &[Vec<(usize, f64)>], z: &[f64], m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m];
        for (c, col) in cols.iter().enumerate() {
            for &(r, v) in col {
                out[r] += v * z[c];
            }
        }
        out
    }

    #[test]
    fn solves_dense_system() {
        let cols = vec![vec![(0, 2.0), (1, 1.0), (2, -1.0)], vec![(0, 1.0), (1, 3.0)], vec![(1, -2.0), (2, 4.0)]];
        let refs: Vec<&[(usize, f64)]> = cols.iter().map(|c| c.as_slice()).collect();
        let f = factor(3, &refs);
        assert!(f.missing_rows.is_empty() && f.missing_cols.is_empty());
        let b = [1.0, -2.0, 5.0];
        let mut rhs = b.to_vec();
        let mut z = vec![0.0; 3];
        f.lu.solve(&mut rhs, &mut z);
        let back = mat_vec(&cols, &z, 3);
        for (x, y) in back.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        let c = [3.0, -1.0, 2.0];
        let mut y = vec![0.0; 3];
        f.lu.solve_transposed(&c, &mut y);
        for (j, col) in cols.iter().enumerate() {
            let v: f64 = col.iter().map(|&(r, a)| a * y[r]).sum();
            assert!((v - c[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn reports_dependent_columns() {
        let cols = [vec![(0, 1.0), (1, 1.0)], vec![(0, 2.0), (1, 2.0)], vec![(2, 1.0)]];
        let refs: Vec<&[(usize, f64)]> = cols.iter().map(|c| c.as_slice()).collect();
        let f = factor(3, &refs);
        assert_eq!(f.missing_cols.len(), 1);
        assert_eq!(f.missing_rows.len(), 1);
    }
}
