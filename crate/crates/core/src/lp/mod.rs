//! Bounded-variable revised simplex.
//!
//! Rows are `=`, `>=` or `<=`; every variable has `lo <= x <= hi` with `hi`
//! possibly infinite. Fixed variables are substituted out before solving.
//! Phase 1 minimises the sum of artificial variables; phase 2 the objective.
//! Pricing is Dantzig's rule with a Harris ratio test, switching to Bland's
//! rule while a run of degenerate pivots persists.
//!
//! The basis inverse is kept explicitly and updated by elementary row
//! operations; re-inversion goes through a sparse LU factorisation.
//!
//! A solve can start from the basis of an earlier, related solve. When that
//! basis is dual feasible but not primal feasible (tightened bounds, added
//! rows) the dual simplex restores feasibility; if neither holds, or anything
//! goes wrong, the solve restarts cold.

mod lu;

use alloc::vec;
use alloc::vec::Vec;

pub const EPS_FEAS: f64 = 1e-7;
pub const EPS_OBJ: f64 = 1e-6;
pub const EPS_INT: f64 = 1e-6;

const PIVOT_TOL: f64 = 1e-9;
const PRICE_TOL: f64 = 1e-9;
const DEGENERATE_RUN: usize = 40;
/// Basis changes between factorisations.
const REFACTOR_PERIOD: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Ge,
    Le,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.relation {
            Relation::Eq => (act - self.rhs).abs(),
            Relation::Ge => (self.rhs - act).max(0.0),
            Relation::Le => (act - self.rhs).max(0.0),
        }
    }
}

/// Minimisation problem.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LpProblem {
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<Row>,
}

impl LpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a column and returns its index.
    pub fn add_var(&mut self, cost: f64, lo: f64, hi: f64) -> usize {
        self.cost.push(cost);
        self.lower.push(lo);
        self.upper.push(hi);
        self.cost.len() - 1
    }

    pub fn add_row(&mut self, terms: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> usize {
        self.rows.push(Row { terms, relation, rhs });
        self.rows.len() - 1
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) {
        self.lower[var] = lo;
        self.upper[var] = hi;
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }

    pub fn bounds(&self, var: usize) -> (f64, f64) {
        (self.lower[var], self.upper[var])
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest row or bound violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|r| r.violation(x)).fold(0.0, f64::max);
        let bounds =
            (0..self.num_vars()).map(|j| (self.lower[j] - x[j]).max(x[j] - self.upper[j]).max(0.0)).fold(0.0, f64::max);
        rows.max(bounds)
    }

    pub fn validate(&self) -> Result<(), LpError> {
        for j in 0..self.num_vars() {
            let (lo, hi, c) = (self.lower[j], self.upper[j], self.cost[j]);
            if lo.is_nan() || hi.is_nan() || !c.is_finite() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(LpError::NonFinite);
            }
            if lo > hi {
                return Err(LpError::BadBounds(j));
            }
        }
        for (i, r) in self.rows.iter().enumerate() {
            if !r.rhs.is_finite() {
                return Err(LpError::NonFinite);
            }
            for &(j, a) in &r.terms {
                if j >= self.num_vars() {
                    return Err(LpError::BadIndex { row: i, var: j });
                }
                if !a.is_finite() {
                    return Err(LpError::NonFinite);
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Position of a variable (or of a row's slack) relative to a basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable at zero.
    Free,
}

/// A simplex basis in terms of the original variables and rows. Rows added
/// after it was taken are treated as having a basic slack.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Basis {
    pub vars: Vec<VarStatus>,
    pub rows: Vec<VarStatus>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    /// Objective value at `x` (meaningful when optimal).
    pub objective: f64,
    /// Primal point; for infeasible problems the last iterate.
    pub x: Vec<f64>,
    /// Row duals at optimality (empty otherwise).
    pub duals: Vec<f64>,
    /// Positive iff infeasible: leftover artificial mass, or the violation of
    /// the row that proved infeasibility in the dual simplex.
    pub infeasibility: f64,
    pub iterations: usize,
    /// Final basis when optimal.
    pub basis: Option<Basis>,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("variable {0} has lower bound above upper bound")]
    BadBounds(usize),
    #[error("row {row} references missing variable {var}")]
    BadIndex { row: usize, var: usize },
    #[error("non-finite coefficient, cost or bound")]
    NonFinite,
    #[error("iteration limit reached")]
    IterationLimit,
    #[error("basis became numerically singular")]
    Singular,
}

/// Anything that can solve an [`LpProblem`].
pub trait LpSolver {
    fn solve(&self, p: &LpProblem) -> Result<LpResult, LpError>;

    /// Solves starting from `start` where supported.
    fn solve_from(&self, p: &LpProblem, start: Option<&Basis>) -> Result<LpResult, LpError> {
        let _ = start;
        self.solve(p)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RevisedSimplex {
    /// Defaults to a generous multiple of the problem size.
    pub max_iterations: Option<usize>,
}

impl LpSolver for RevisedSimplex {
    fn solve(&self, p: &LpProblem) -> Result<LpResult, LpError> {
        self.solve_from(p, None)
    }

    fn solve_from(&self, p: &LpProblem, start: Option<&Basis>) -> Result<LpResult, LpError> {
        p.validate()?;
        let pre = Presolved::new(p);
        if let Some(excess) = pre.trivially_infeasible {
            let x = pre.expand(&[]);
            return Ok(LpResult {
                status: LpStatus::Infeasible,
                objective: p.objective_value(&x),
                x,
                duals: Vec::new(),
                infeasibility: excess,
                iterations: 0,
                basis: None,
            });
        }
        let limit = self.max_iterations.unwrap_or(200 * (pre.rows.len() + pre.cols.len()) + 10_000);
        let mut spent = 0;
        if let Some(basis) = start {
            match Simplex::warm(&pre, basis, limit) {
                Ok(mut s) => {
                    match s.solve_warm() {
                        Ok(Some(outcome)) => match finish(p, &pre, &s, outcome) {
                            Ok(res) => return Ok(res),
                            Err(e) => log::debug!("warm start ended badly ({e}); restarting cold"),
                        },
                        Ok(None) => {
                            log::debug!("warm start gave up after {} iterations; restarting cold", s.iterations)
                        }
                        Err(e) => log::debug!("warm start failed ({e}); restarting cold"),
                    }
                    spent = s.iterations;
                }
                Err(e) => log::debug!("warm basis unusable ({e}); starting cold"),
            }
        }
        let mut s = Simplex::new(&pre, limit)?;
        s.iterations = spent;
        let outcome = s.solve()?;
        finish(p, &pre, &s, outcome)
    }
}

fn finish(p: &LpProblem, pre: &Presolved, s: &Simplex, outcome: Outcome) -> Result<LpResult, LpError> {
    let x = pre.expand(&s.x[..pre.cols.len()]);
    let x: Vec<f64> = x.iter().enumerate().map(|(j, &v)| v.clamp(p.lower[j], p.upper[j])).collect();
    let objective = p.objective_value(&x);
    let base = LpResult {
        status: LpStatus::Optimal,
        objective,
        x,
        duals: Vec::new(),
        infeasibility: 0.0,
        iterations: s.iterations,
        basis: None,
    };
    match outcome {
        Outcome::Infeasible(r) => Ok(LpResult { status: LpStatus::Infeasible, infeasibility: r, ..base }),
        Outcome::Unbounded => Ok(LpResult { status: LpStatus::Unbounded, objective: f64::NEG_INFINITY, ..base }),
        Outcome::Optimal => {
            if p.max_violation(&base.x) > EPS_FEAS {
                log::warn!("simplex optimum violates constraints by {:e}", p.max_violation(&base.x));
                return Err(LpError::Singular);
            }
            let mut duals = vec![0.0; p.num_rows()];
            for (r, &orig) in pre.row_origin.iter().enumerate() {
                duals[orig] = s.y[r];
            }
            Ok(LpResult { duals, basis: Some(s.export_basis(pre, p.num_rows())), ..base })
        }
    }
}

/// Solves with the built-in simplex.
pub fn solve_lp(p: &LpProblem) -> Result<LpResult, LpError> {
    RevisedSimplex::default().solve(p)
}

/// Whether every coordinate is within `tol` of an integer; offenders are
/// returned by decreasing distance to the nearest integer (ties by index).
pub fn is_integral(x: &[f64], tol: f64) -> (bool, Vec<usize>) {
    let mut off: Vec<(f64, usize)> =
        x.iter().enumerate().map(|(i, &v)| ((v - libm::round(v)).abs(), i)).filter(|&(d, _)| d > tol).collect();
    off.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    (off.is_empty(), off.into_iter().map(|(_, i)| i).collect())
}

/// Problem with fixed variables substituted and empty rows dropped.
struct Presolved {
    n_orig: usize,
    /// Original index of each kept column.
    cols: Vec<usize>,
    /// Value of every original variable that was fixed (NaN for kept ones).
    fixed: Vec<f64>,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Kept rows over kept-column indices.
    rows: Vec<Row>,
    row_origin: Vec<usize>,
    trivially_infeasible: Option<f64>,
}

impl Presolved {
    fn new(p: &LpProblem) -> Self {
        let n = p.num_vars();
        let mut fixed = vec![f64::NAN; n];
        let mut map = vec![usize::MAX; n];
        let mut cols = Vec::new();
        for j in 0..n {
            if p.lower[j] == p.upper[j] {
                fixed[j] = p.lower[j];
            } else {
                map[j] = cols.len();
                cols.push(j);
            }
        }
        let mut rows = Vec::new();
        let mut row_origin = Vec::new();
        let mut worst: Option<f64> = None;
        let mut dense = vec![0.0; cols.len()];
        let mut touched: Vec<usize> = Vec::new();
        for (i, r) in p.rows.iter().enumerate() {
            let mut rhs = r.rhs;
            for &(j, a) in &r.terms {
                if map[j] == usize::MAX {
                    rhs -= a * fixed[j];
                } else {
                    let c = map[j];
                    if dense[c] == 0.0 {
                        touched.push(c);
                    }
                    dense[c] += a;
                    if dense[c] == 0.0 {
                        // keep it in `touched`; filtered below
                        dense[c] = -0.0;
                    }
                }
            }
            touched.sort_unstable();
            touched.dedup();
            let terms: Vec<(usize, f64)> = touched.iter().map(|&c| (c, dense[c])).filter(|&(_, a)| a != 0.0).collect();
            for &c in &touched {
                dense[c] = 0.0;
            }
            touched.clear();
            if terms.is_empty() {
                let v = Row { terms: Vec::new(), relation: r.relation, rhs }.violation(&[]);
                if v > EPS_FEAS {
                    worst = Some(worst.map_or(v, |w: f64| w.max(v)));
                }
                continue;
            }
            rows.push(Row { terms, relation: r.relation, rhs });
            row_origin.push(i);
        }
        Presolved {
            n_orig: n,
            cost: cols.iter().map(|&j| p.cost[j]).collect(),
            lower: cols.iter().map(|&j| p.lower[j]).collect(),
            upper: cols.iter().map(|&j| p.upper[j]).collect(),
            cols,
            fixed,
            rows,
            row_origin,
            trivially_infeasible: worst,
        }
    }

    fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut x = self.fixed.clone();
        for (c, &j) in self.cols.iter().enumerate() {
            x[j] = reduced.get(c).copied().unwrap_or_else(|| initial_value(self.lower[c], self.upper[c]));
        }
        debug_assert_eq!(x.len(), self.n_orig);
        x
    }
}

fn initial_value(lo: f64, hi: f64) -> f64 {
    if lo.is_finite() {
        lo
    } else if hi.is_finite() {
        hi
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum State {
    Basic,
    Lower,
    Upper,
    /// Free variable parked at zero.
    Zero,
}

/// Nonbasic position closest to the requested one.
fn park(lo: f64, hi: f64, upper: bool) -> (State, f64) {
    if upper && hi.is_finite() {
        (State::Upper, hi)
    } else if lo.is_finite() {
        (State::Lower, lo)
    } else if hi.is_finite() {
        (State::Upper, hi)
    } else {
        (State::Zero, 0.0)
    }
}

enum Outcome {
    Optimal,
    Infeasible(f64),
    Unbounded,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

enum DualEnd {
    Feasible,
    Infeasible,
}

struct Simplex {
    m: usize,
    n_struct: usize,
    cols: Vec<Vec<(usize, f64)>>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    obj: Vec<f64>,
    cost: Vec<f64>,
    b: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    basis: Vec<usize>,
    lu: lu::Lu,
    /// Pivots since the last factorisation, oldest first.
    etas: Vec<Eta>,
    y: Vec<f64>,
    artificials: core::ops::Range<usize>,
    iterations: usize,
    limit: usize,
    since_refactor: usize,
    refactor_period: usize,
}

/// One basis change: the entering column in terms of the previous basis.
struct Eta {
    row: usize,
    pivot: f64,
    entries: Vec<(usize, f64)>,
}

/// Structural columns followed by one slack per row (row i reads
/// `a.x + s_i = b_i`), with bounds.
struct Skeleton {
    cols: Vec<Vec<(usize, f64)>>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    b: Vec<f64>,
}

impl Skeleton {
    fn new(pre: &Presolved) -> Self {
        let n = pre.cols.len();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, r) in pre.rows.iter().enumerate() {
            for &(c, a) in &r.terms {
                cols[c].push((i, a));
            }
        }
        let mut lb = pre.lower.clone();
        let mut ub = pre.upper.clone();
        for (i, r) in pre.rows.iter().enumerate() {
            let (slo, shi) = match r.relation {
                Relation::Eq => (0.0, 0.0),
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
            };
            cols.push(vec![(i, 1.0)]);
            lb.push(slo);
            ub.push(shi);
        }
        Skeleton { cols, lb, ub, b: pre.rows.iter().map(|r| r.rhs).collect() }
    }
}

impl Simplex {
    /// Slack basis, with artificials on rows whose slack cannot absorb the
    /// residual.
    fn new(pre: &Presolved, limit: usize) -> Result<Self, LpError> {
        let m = pre.rows.len();
        let n = pre.cols.len();
        let Skeleton { mut cols, mut lb, mut ub, b } = Skeleton::new(pre);
        let mut x: Vec<f64> = (0..n).map(|c| initial_value(lb[c], ub[c])).collect();
        let mut state: Vec<State> = (0..n).map(|c| park(lb[c], ub[c], false).0).collect();
        // Row residuals with all structurals at their starting values.
        let mut resid = b.clone();
        for c in 0..n {
            for &(i, a) in &cols[c] {
                resid[i] -= a * x[c];
            }
        }
        let mut basis = vec![usize::MAX; m];
        let mut need_art = Vec::new();
        for i in 0..m {
            let s = n + i;
            let (slo, shi) = (lb[s], ub[s]);
            if resid[i] >= slo - EPS_FEAS && resid[i] <= shi + EPS_FEAS {
                x.push(resid[i]);
                state.push(State::Basic);
                basis[i] = s;
            } else {
                let at = if resid[i] < slo { slo } else { shi };
                x.push(at);
                state.push(if at == slo { State::Lower } else { State::Upper });
                need_art.push((i, resid[i] - at));
            }
        }
        let art_start = cols.len();
        for &(i, gap) in &need_art {
            let sign = if gap >= 0.0 { 1.0 } else { -1.0 };
            basis[i] = cols.len();
            cols.push(vec![(i, sign)]);
            lb.push(0.0);
            ub.push(f64::INFINITY);
            x.push(gap.abs());
            state.push(State::Basic);
        }
        let art_end = cols.len();
        let total = cols.len();
        let mut obj = vec![0.0; total];
        obj[..n].copy_from_slice(&pre.cost);
        let mut s = Simplex {
            m,
            n_struct: n,
            cols,
            lb,
            ub,
            obj,
            cost: vec![0.0; total],
            b,
            x,
            state,
            basis,
            lu: lu::Lu::empty(),
            etas: Vec::new(),
            y: vec![0.0; m],
            artificials: art_start..art_end,
            iterations: 0,
            limit,
            since_refactor: 0,
            refactor_period: REFACTOR_PERIOD,
        };
        s.refactor()?;
        Ok(s)
    }

    /// Basis taken from an earlier solve. Columns that turn out dependent are
    /// made nonbasic and the uncovered rows get their slacks.
    fn warm(pre: &Presolved, start: &Basis, limit: usize) -> Result<Self, LpError> {
        let m = pre.rows.len();
        let n = pre.cols.len();
        let Skeleton { cols, lb, ub, b } = Skeleton::new(pre);
        let total = cols.len();
        let wanted = |j: usize| -> VarStatus {
            if j < n {
                start.vars.get(pre.cols[j]).copied().unwrap_or(VarStatus::AtLower)
            } else {
                start.rows.get(pre.row_origin[j - n]).copied().unwrap_or(VarStatus::Basic)
            }
        };
        let mut state = vec![State::Lower; total];
        let mut x = vec![0.0; total];
        let mut candidates = Vec::new();
        for j in 0..total {
            let w = wanted(j);
            if w == VarStatus::Basic {
                candidates.push(j);
            }
            (state[j], x[j]) = park(lb[j], ub[j], w == VarStatus::AtUpper);
        }
        let refs: Vec<&[(usize, f64)]> = candidates.iter().map(|&j| cols[j].as_slice()).collect();
        let f = lu::factor(m, &refs);
        let mut basis: Vec<usize> = candidates
            .iter()
            .enumerate()
            .filter(|(c, _)| f.missing_cols.binary_search(c).is_err())
            .map(|(_, &j)| j)
            .collect();
        basis.extend(f.missing_rows.iter().map(|&r| n + r));
        debug_assert_eq!(basis.len(), m);
        for &j in &basis {
            state[j] = State::Basic;
        }
        let mut obj = vec![0.0; total];
        obj[..n].copy_from_slice(&pre.cost);
        let mut s = Simplex {
            m,
            n_struct: n,
            cols,
            lb,
            ub,
            cost: obj.clone(),
            obj,
            b,
            x,
            state,
            basis,
            lu: lu::Lu::empty(),
            etas: Vec::new(),
            y: vec![0.0; m],
            artificials: total..total,
            iterations: 0,
            limit,
            since_refactor: 0,
            refactor_period: REFACTOR_PERIOD,
        };
        s.refactor()?;
        Ok(s)
    }

    fn solve(&mut self) -> Result<Outcome, LpError> {
        if !self.artificials.is_empty() {
            for j in self.artificials.clone() {
                self.cost[j] = 1.0;
            }
            self.run()?;
            let residual: f64 = self.artificials.clone().map(|j| self.x[j]).sum();
            let scale = self.b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            if residual > EPS_FEAS * scale {
                return Ok(Outcome::Infeasible(residual));
            }
            for j in self.artificials.clone() {
                self.ub[j] = 0.0;
                self.cost[j] = 0.0;
                if self.state[j] != State::Basic {
                    self.x[j] = 0.0;
                    self.state[j] = State::Lower;
                }
            }
        }
        self.cost[..self.n_struct].copy_from_slice(&self.obj[..self.n_struct]);
        match self.run()? {
            PhaseEnd::Optimal => Ok(Outcome::Optimal),
            PhaseEnd::Unbounded => Ok(Outcome::Unbounded),
        }
    }

    /// `None` when the start basis is of no use (or the dual simplex claims
    /// infeasibility, which a cold solve confirms more robustly).
    fn solve_warm(&mut self) -> Result<Option<Outcome>, LpError> {
        if !self.primal_feasible() {
            if !self.make_dual_feasible() {
                return Ok(None);
            }
            match self.dual()? {
                DualEnd::Feasible => {}
                DualEnd::Infeasible => return Ok(None),
            }
        }
        Ok(Some(match self.run()? {
            PhaseEnd::Optimal => Outcome::Optimal,
            PhaseEnd::Unbounded => Outcome::Unbounded,
        }))
    }

    fn infeasibility(&self, j: usize) -> f64 {
        (self.lb[j] - self.x[j]).max(self.x[j] - self.ub[j]).max(0.0)
    }

    fn primal_feasible(&self) -> bool {
        self.basis.iter().all(|&j| self.infeasibility(j) <= EPS_FEAS)
    }

    /// Moves boxed nonbasics to the bound their reduced cost prefers; false
    /// if some unboxed one has the wrong sign.
    fn make_dual_feasible(&mut self) -> bool {
        self.compute_duals();
        let mut moved = false;
        for j in 0..self.cols.len() {
            if self.state[j] == State::Basic || self.lb[j] == self.ub[j] {
                continue;
            }
            let d = self.reduced_cost(j);
            let to_upper = match self.state[j] {
                State::Lower if d < -PRICE_TOL => true,
                State::Upper if d > PRICE_TOL => false,
                State::Zero if d.abs() > PRICE_TOL => return false,
                _ => continue,
            };
            let bound = if to_upper { self.ub[j] } else { self.lb[j] };
            if !bound.is_finite() {
                return false;
            }
            self.state[j] = if to_upper { State::Upper } else { State::Lower };
            self.x[j] = bound;
            moved = true;
        }
        if moved {
            self.recompute_basics();
        }
        true
    }

    /// Dual simplex: the most infeasible basic variable leaves at the bound it
    /// violates; the entering variable keeps every reduced cost's sign.
    fn dual(&mut self) -> Result<DualEnd, LpError> {
        let m = self.m;
        loop {
            if self.since_refactor >= self.refactor_period {
                self.refactor()?;
            }
            let Some((r, _)) = self
                .basis
                .iter()
                .enumerate()
                .map(|(i, &j)| (i, self.infeasibility(j)))
                .filter(|&(_, v)| v > EPS_FEAS)
                .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            else {
                return Ok(DualEnd::Feasible);
            };
            if self.iterations >= self.limit {
                return Err(LpError::IterationLimit);
            }
            self.iterations += 1;
            self.compute_duals();
            let p = self.basis[r];
            let below = self.x[p] < self.lb[p];
            let mut unit = vec![0.0; m];
            unit[r] = 1.0;
            let rho = self.btran(unit);

            // (column, pivot-row entry, ratio)
            let mut eligible: Vec<(usize, f64, f64)> = Vec::new();
            for j in 0..self.cols.len() {
                if self.state[j] == State::Basic || self.lb[j] == self.ub[j] {
                    continue;
                }
                let alpha: f64 = self.cols[j].iter().map(|&(i, a)| rho[i] * a).sum();
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                // Direction x_j can move in, and whether that pushes x_p the
                // right way (x_p changes by -alpha per unit of x_j).
                let dir = match self.state[j] {
                    State::Lower => 1.0,
                    State::Upper => -1.0,
                    _ => {
                        if below {
                            -alpha.signum()
                        } else {
                            alpha.signum()
                        }
                    }
                };
                let effect = -alpha * dir;
                if (below && effect <= 0.0) || (!below && effect >= 0.0) {
                    continue;
                }
                let d = (self.reduced_cost(j) * dir).max(0.0);
                eligible.push((j, alpha, d / alpha.abs()));
            }
            let Some(relaxed) = eligible.iter().map(|&(_, a, t)| t + PRICE_TOL / a.abs()).min_by(f64::total_cmp) else {
                return Ok(DualEnd::Infeasible);
            };
            let (q, _, _) = eligible
                .iter()
                .copied()
                .filter(|&(_, _, t)| t <= relaxed)
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
                .expect("the minimiser passes its own relaxed bound");

            let alpha = self.column(q);
            let target = if below { self.lb[p] } else { self.ub[p] };
            let delta = (self.x[p] - target) / alpha[r];
            for (i, &a) in alpha.iter().enumerate() {
                if a != 0.0 {
                    self.x[self.basis[i]] -= a * delta;
                }
            }
            self.x[q] += delta;
            self.x[p] = target;
            self.state[p] = if below { State::Lower } else { State::Upper };
            self.basis[r] = q;
            self.state[q] = State::Basic;
            self.pivot(r, &alpha);
            self.since_refactor += 1;
        }
    }

    fn compute_duals(&mut self) {
        let cb: Vec<f64> = self.basis.iter().map(|&j| self.cost[j]).collect();
        self.y = self.btran(cb);
    }

    /// `B^-1 a` for `a` indexed by row; the result is indexed by basis slot.
    fn ftran(&self, mut a: Vec<f64>) -> Vec<f64> {
        let mut z = vec![0.0; self.m];
        self.lu.solve(&mut a, &mut z);
        for e in &self.etas {
            let zr = z[e.row] / e.pivot;
            z[e.row] = zr;
            if zr != 0.0 {
                for &(i, v) in &e.entries {
                    z[i] -= v * zr;
                }
            }
        }
        z
    }

    /// `c^T B^-1` for `c` indexed by basis slot; the result is indexed by row.
    fn btran(&self, mut c: Vec<f64>) -> Vec<f64> {
        for e in self.etas.iter().rev() {
            let mut v = c[e.row];
            for &(i, a) in &e.entries {
                v -= a * c[i];
            }
            c[e.row] = v / e.pivot;
        }
        let mut y = vec![0.0; self.m];
        self.lu.solve_transposed(&c, &mut y);
        y
    }

    fn reduced_cost(&self, j: usize) -> f64 {
        self.cost[j] - self.cols[j].iter().map(|&(r, a)| self.y[r] * a).sum::<f64>()
    }

    /// Entering variable and direction (+1 increase, -1 decrease).
    fn price(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.cols.len() {
            if self.state[j] == State::Basic || (self.lb[j] == self.ub[j] && self.state[j] != State::Zero) {
                continue;
            }
            let d = self.reduced_cost(j);
            let dir = match self.state[j] {
                State::Lower if d < -PRICE_TOL => (1.0, -d),
                State::Upper if d > PRICE_TOL => (-1.0, d),
                State::Zero if d < -PRICE_TOL => (1.0, -d),
                State::Zero if d > PRICE_TOL => (-1.0, d),
                _ => continue,
            };
            if bland {
                return Some((j, dir.0));
            }
            if best.is_none_or(|(_, _, score)| dir.1 > score) {
                best = Some((j, dir.0, dir.1));
            }
        }
        best.map(|(j, d, _)| (j, d))
    }

    fn column(&self, j: usize) -> Vec<f64> {
        let mut a = vec![0.0; self.m];
        for &(r, v) in &self.cols[j] {
            a[r] += v;
        }
        self.ftran(a)
    }

    fn run(&mut self) -> Result<PhaseEnd, LpError> {
        let mut bland = false;
        let mut degenerate = 0usize;
        let mut fresh = false;
        loop {
            if self.since_refactor >= self.refactor_period {
                self.refactor()?;
                fresh = true;
            }
            self.compute_duals();
            let Some((q, dir)) = self.price(bland) else {
                if fresh {
                    return Ok(PhaseEnd::Optimal);
                }
                self.refactor()?;
                fresh = true;
                continue;
            };
            if self.iterations >= self.limit {
                return Err(LpError::IterationLimit);
            }
            self.iterations += 1;
            let alpha = self.column(q);
            // Basic i moves by -dir * alpha[i] per unit step.
            let flip = self.ub[q] - self.lb[q];
            let (leave, theta) = self.ratio_test(&alpha, dir, bland);
            let step = match leave {
                Some(_) if theta < flip => theta,
                _ if flip.is_finite() => flip,
                Some(_) => theta,
                None => return Ok(PhaseEnd::Unbounded),
            };
            let step = step.max(0.0);
            if step <= 1e-12 {
                degenerate += 1;
                if degenerate > DEGENERATE_RUN {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
            for (i, &a) in alpha.iter().enumerate() {
                if a != 0.0 {
                    self.x[self.basis[i]] -= dir * step * a;
                }
            }
            self.x[q] += dir * step;
            let is_flip = match leave {
                Some(_) => theta >= flip,
                None => true,
            };
            if is_flip {
                self.state[q] = if dir > 0.0 { State::Upper } else { State::Lower };
                self.x[q] = if dir > 0.0 { self.ub[q] } else { self.lb[q] };
                fresh = false;
                continue;
            }
            let r = leave.unwrap_or_default();
            let out = self.basis[r];
            // Leaving variable snaps to the bound it reached.
            let moving_down = -dir * alpha[r] < 0.0;
            if moving_down {
                self.x[out] = self.lb[out];
                self.state[out] = State::Lower;
            } else {
                self.x[out] = self.ub[out];
                self.state[out] = State::Upper;
            }
            if self.lb[out] == f64::NEG_INFINITY && self.ub[out] == f64::INFINITY {
                self.state[out] = State::Zero;
            }
            self.basis[r] = q;
            self.state[q] = State::Basic;
            self.pivot(r, &alpha);
            self.since_refactor += 1;
            fresh = false;
        }
    }
    /// Harris two-pass ratio test; Bland mode takes the smallest index among
    /// exact ties instead of the largest pivot.
    fn ratio_test(&self, alpha: &[f64], dir: f64, bland: bool) -> (Option<usize>, f64) {
        let mut relaxed = f64::INFINITY;
        for (i, &a) in alpha.iter().enumerate() {
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            let j = self.basis[i];
            let delta = -dir * a;
            let lim = if delta < 0.0 {
                if self.lb[j] == f64::NEG_INFINITY {
                    continue;
                }
                (self.x[j] - self.lb[j] + EPS_FEAS) / -delta
            } else {
                if self.ub[j] == f64::INFINITY {
                    continue;
                }
                (self.ub[j] - self.x[j] + EPS_FEAS) / delta
            };
            relaxed = relaxed.min(lim);
        }
        if relaxed == f64::INFINITY {
            return (None, f64::INFINITY);
        }
        let mut pick: Option<(usize, f64, f64)> = None;
        for (i, &a) in alpha.iter().enumerate() {
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            let j = self.basis[i];
            let delta = -dir * a;
            let exact = if delta < 0.0 {
                if self.lb[j] == f64::NEG_INFINITY {
                    continue;
                }
                (self.x[j] - self.lb[j]) / -delta
            } else {
                if self.ub[j] == f64::INFINITY {
                    continue;
                }
                (self.ub[j] - self.x[j]) / delta
            };
            if exact > relaxed {
                continue;
            }
            let better = match pick {
                None => true,
                Some((pi, _, pa)) => {
                    if bland {
                        j < self.basis[pi]
                    } else {
                        a.abs() > pa
                    }
                }
            };
            if better {
                pick = Some((i, exact.max(0.0), a.abs()));
            }
        }
        match pick {
            Some((i, t, _)) => (Some(i), t),
            None => (None, f64::INFINITY),
        }
    }

    fn pivot(&mut self, r: usize, alpha: &[f64]) {
        let entries = alpha.iter().enumerate().filter(|&(i, &a)| i != r && a != 0.0).map(|(i, &a)| (i, a)).collect();
        self.etas.push(Eta { row: r, pivot: alpha[r], entries });
    }

    /// Re-factorises the basis and recomputes basic values.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        self.since_refactor = 0;
        let refs: Vec<&[(usize, f64)]> = self.basis.iter().map(|&j| self.cols[j].as_slice()).collect();
        let f = lu::factor(m, &refs);
        if !f.missing_cols.is_empty() {
            return Err(LpError::Singular);
        }
        self.lu = f.lu;
        self.etas.clear();
        self.recompute_basics();
        Ok(())
    }

    /// `b - N x_N`.
    fn nonbasic_rhs(&self) -> Vec<f64> {
        let mut rhs = self.b.clone();
        for j in 0..self.cols.len() {
            if self.state[j] != State::Basic && self.x[j] != 0.0 {
                for &(r, a) in &self.cols[j] {
                    rhs[r] -= a * self.x[j];
                }
            }
        }
        rhs
    }

    fn recompute_basics(&mut self) {
        let xb = self.ftran(self.nonbasic_rhs());
        for (slot, v) in xb.into_iter().enumerate() {
            self.x[self.basis[slot]] = v;
        }
    }

    fn export_basis(&self, pre: &Presolved, num_rows: usize) -> Basis {
        let status = |s: State| match s {
            State::Basic => VarStatus::Basic,
            State::Lower => VarStatus::AtLower,
            State::Upper => VarStatus::AtUpper,
            State::Zero => VarStatus::Free,
        };
        let mut vars = vec![VarStatus::AtLower; pre.n_orig];
        for (c, &j) in pre.cols.iter().enumerate() {
            vars[j] = status(self.state[c]);
        }
        let mut rows = vec![VarStatus::Basic; num_rows];
        for (i, &orig) in pre.row_origin.iter().enumerate() {
            rows[orig] = status(self.state[self.n_struct + i]);
        }
        Basis { vars, rows }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_bounded_minimum() {
        let mut p = LpProblem::new();
        let x = p.add_var(1.0, 0.0, 5.0);
        p.add_row(vec![(x, 1.0)], Relation::Ge, 2.0);
        let r = solve_lp(&p).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective - 2.0).abs() < EPS_OBJ);
    }

    #[test]
    fn unbounded_ray() {
        let mut p = LpProblem::new();
        p.add_var(-1.0, 0.0, f64::INFINITY);
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn contradictory_equalities() {
        let mut p = LpProblem::new();
        let x = p.add_var(0.0, f64::NEG_INFINITY, f64::INFINITY);
        p.add_row(vec![(x, 1.0)], Relation::Eq, 1.0);
        p.add_row(vec![(x, 1.0)], Relation::Eq, 2.0);
        let r = solve_lp(&p).unwrap();
        assert_eq!(r.status, LpStatus::Infeasible);
        assert!(r.infeasibility > 0.5);
    }

    #[test]
    fn fixed_variables_only() {
        let mut p = LpProblem::new();
        let x = p.add_var(3.0, 1.0, 1.0);
        p.add_row(vec![(x, 1.0)], Relation::Le, 0.5);
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Infeasible);
        p.rows[0].rhs = 1.0;
        let r = solve_lp(&p).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert_eq!(r.objective, 3.0);
    }

    #[test]
    fn small_mixed_problem() {
        // min -x - 2y  s.t. x + y <= 4, x - y >= -2, 0<=x<=3, 0<=y
        let mut p = LpProblem::new();
        let x = p.add_var(-1.0, 0.0, 3.0);
        let y = p.add_var(-2.0, 0.0, f64::INFINITY);
        p.add_row(vec![(x, 1.0), (y, 1.0)], Relation::Le, 4.0);
        p.add_row(vec![(x, 1.0), (y, -1.0)], Relation::Ge, -2.0);
        let r = solve_lp(&p).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        // Vertex (1, 3): objective -7.
        assert!((r.objective + 7.0).abs() < EPS_OBJ, "{r:?}");
        assert!((r.x[0] - 1.0).abs() < 1e-9 && (r.x[1] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn integrality_report() {
        assert_eq!(is_integral(&[1.0, 0.0], EPS_INT), (true, vec![]));
        assert_eq!(is_integral(&[0.5, 1.0], EPS_INT), (false, vec![0]));
        assert_eq!(is_integral(&[1.0 - 1e-9], EPS_INT), (true, vec![]));
        assert_eq!(is_integral(&[0.9, 0.5, 2.3, 0.5], EPS_INT), (false, vec![1, 3, 2, 0]));
    }
}
