//! Dense bounded-variable primal simplex.
//!
//! Every constraint row gets a logical variable (`a x + s = b`, with `s >= 0`
//! for `<=`, `s <= 0` for `>=`, `s = 0` for `=`). Rows whose logical cannot
//! start feasibly get an artificial variable, and phase one minimizes the sum
//! of artificials. Entering columns are chosen by largest reduced cost; after
//! a run of degenerate pivots the engine switches to Bland's lowest-index rule
//! until the objective moves again, which rules out cycling. With
//! [`PricingRule::Bland`] the lowest-index rule is used throughout.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::exact::{order_graph, solve_binary_labeling};
use crate::model::{ActiveSet, Dataset, NoiseModel};

pub const PIVOT_TOL: f64 = 1e-9;
pub const FEAS_TOL: f64 = 1e-8;
const OPT_TOL: f64 = 1e-9;
const DEGENERATE_STREAK: usize = 25;
/// Pivots between rebuilds of the tableau from the original columns.
const REFACTOR_EVERY: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// Minimize `c^T x` subject to linear rows and per-variable bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub constraints: Vec<LinearConstraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LpProblem {
    /// Variables default to `[0, +inf)`.
    pub fn new(objective: Vec<f64>) -> Self {
        let m = objective.len();
        Self { objective, constraints: Vec::new(), lower: vec![0.0; m], upper: vec![f64::INFINITY; m] }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Result<()> {
        if coeffs.len() != self.num_vars() {
            return arg(format!("constraint has {} coefficients for {} variables", coeffs.len(), self.num_vars()));
        }
        self.constraints.push(LinearConstraint { coeffs, relation, rhs });
        Ok(())
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> Result<()> {
        if var >= self.num_vars() {
            return arg(format!("variable {var} out of range"));
        }
        if lower.is_nan() || upper.is_nan() || lower > upper || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return arg(format!("invalid bounds [{lower}, {upper}] for variable {var}"));
        }
        self.lower[var] = lower;
        self.upper[var] = upper;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.num_vars();
        if self.lower.len() != m || self.upper.len() != m {
            return arg("bound vectors must match the number of variables");
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return arg("objective coefficients must be finite");
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != m {
                return arg(format!("constraint {} has {} coefficients for {m} variables", i + 1, c.coeffs.len()));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|a| !a.is_finite()) {
                return arg(format!("constraint {} has non-finite data", i + 1));
            }
        }
        for j in 0..m {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return arg(format!("invalid bounds [{lo}, {hi}] for variable {j}"));
            }
        }
        Ok(())
    }

    /// Largest constraint or bound violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let v = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        worst
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Plain-text dump, one constraint per line, for cross-checking with
    /// external solvers. Variables are named `x1..xm`.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let term = |coeffs: &[f64]| -> String {
            let parts: Vec<String> =
                coeffs.iter().enumerate().filter(|(_, a)| **a != 0.0).map(|(j, a)| format!("{a} x{}", j + 1)).collect();
            if parts.is_empty() {
                "0".into()
            } else {
                parts.join(" + ")
            }
        };
        writeln!(w, "# variables {} constraints {}", self.num_vars(), self.constraints.len())?;
        writeln!(w, "min: {}", term(&self.objective))?;
        for (i, c) in self.constraints.iter().enumerate() {
            writeln!(w, "c{}: {} {} {}", i + 1, term(&c.coeffs), c.relation, c.rhs)?;
        }
        for j in 0..self.num_vars() {
            writeln!(w, "bound x{}: {} {}", j + 1, self.lower[j], self.upper[j])?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal values (the last basic solution when not optimal).
    pub x: Vec<f64>,
    pub objective: f64,
    /// Row duals `y` with `y_i = d(objective) / d(rhs_i)`.
    pub duals: Vec<f64>,
    /// Direction of unbounded descent when `status == Unbounded`.
    pub ray: Option<Vec<f64>>,
    /// Phase-one optimum; positive exactly when the problem is infeasible.
    pub infeasibility: f64,
    pub pivots: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PricingRule {
    /// Lowest-index entering and leaving variable at every step.
    Bland,
    /// Largest reduced cost, falling back to Bland during degenerate runs.
    #[default]
    DantzigWithBlandFallback,
}

#[derive(Clone, Copy, Debug)]
pub struct SimplexOptions {
    pub pricing: PricingRule,
    pub max_pivots: usize,
    /// Solve a slightly relaxed copy first and keep its basis when it is
    /// optimal for the original data; falls back to a plain solve otherwise.
    /// Helps on highly degenerate problems.
    pub perturb: bool,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { pricing: PricingRule::default(), max_pivots: 2_000_000, perturb: false }
    }
}

pub fn solve_lp(problem: &LpProblem) -> Result<LpSolution> {
    solve_lp_with(problem, &SimplexOptions::default())
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum VarState {
    Basic,
    Lower,
    Upper,
    Free,
}

struct Tableau {
    rows: usize,
    cols: usize,
    structural: usize,
    t: Vec<f64>,
    /// Original row data `[A | I | artificials]` and right-hand side.
    original: Vec<f64>,
    rhs: Vec<f64>,
    since_refactor: usize,
    beta: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<VarState>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    d: Vec<f64>,
    pivots: usize,
}

enum Step {
    Optimal,
    Unbounded(usize, f64),
    Moved,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.cols + j]
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::Lower => self.lo[j],
            VarState::Upper => self.hi[j],
            VarState::Free | VarState::Basic => 0.0,
        }
    }

    fn recompute_reduced_costs(&mut self) {
        self.d.copy_from_slice(&self.cost);
        for i in 0..self.rows {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * self.cols..(i + 1) * self.cols];
                for (dj, tij) in self.d.iter_mut().zip(row) {
                    *dj -= cb * tij;
                }
            }
        }
        for i in 0..self.rows {
            self.d[self.basis[i]] = 0.0;
        }
    }

    /// Recompute the tableau, basic values and reduced costs from the
    /// original data and the current basis, clearing accumulated rounding.
    fn refactor(&mut self) -> Result<()> {
        let (r, cols) = (self.rows, self.cols);
        self.since_refactor = 0;
        if r == 0 {
            self.recompute_reduced_costs();
            return Ok(());
        }
        // Gauss-Jordan on [B | I] with partial pivoting
        let w = 2 * r;
        let mut aug = vec![0.0; r * w];
        for i in 0..r {
            for (c, &b) in self.basis.iter().enumerate() {
                aug[i * w + c] = self.original[i * cols + b];
            }
            aug[i * w + r + i] = 1.0;
        }
        for c in 0..r {
            let p =
                (c..r).max_by(|&a, &b| aug[a * w + c].abs().total_cmp(&aug[b * w + c].abs())).expect("non-empty range");
            if aug[p * w + c].abs() < 1e-13 {
                return Err(Error::Internal("simplex basis became singular".into()));
            }
            if p != c {
                for k in 0..w {
                    aug.swap(p * w + k, c * w + k);
                }
            }
            let inv = 1.0 / aug[c * w + c];
            aug[c * w..(c + 1) * w].iter_mut().for_each(|v| *v *= inv);
            for i in 0..r {
                if i != c {
                    let f = aug[i * w + c];
                    if f != 0.0 {
                        for k in 0..w {
                            aug[i * w + k] -= f * aug[c * w + k];
                        }
                    }
                }
            }
        }
        // B^-1 sits in the right half of aug
        self.t.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..r {
            for k in 0..r {
                let f = aug[i * w + r + k];
                if f != 0.0 {
                    let src = &self.original[k * cols..(k + 1) * cols];
                    let dst = &mut self.t[i * cols..(i + 1) * cols];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += f * s;
                    }
                }
            }
        }
        let mut resid = self.rhs.clone();
        for j in 0..cols {
            if self.state[j] != VarState::Basic {
                let x = self.nonbasic_value(j);
                if x != 0.0 {
                    for (k, rk) in resid.iter_mut().enumerate() {
                        *rk -= self.original[k * cols + j] * x;
                    }
                }
            }
        }
        for i in 0..r {
            self.beta[i] = (0..r).map(|k| aug[i * w + r + k] * resid[k]).sum();
        }
        for (i, &b) in self.basis.iter().enumerate() {
            for k in 0..r {
                self.t[k * cols + b] = if k == i { 1.0 } else { 0.0 };
            }
        }
        self.recompute_reduced_costs();
        Ok(())
    }

    fn objective(&self) -> f64 {
        let mut z = 0.0;
        for j in 0..self.cols {
            if self.state[j] != VarState::Basic {
                z += self.cost[j] * self.nonbasic_value(j);
            }
        }
        for i in 0..self.rows {
            z += self.cost[self.basis[i]] * self.beta[i];
        }
        z
    }

    fn eligible(&self, j: usize) -> Option<f64> {
        let dj = self.d[j];
        match self.state[j] {
            VarState::Basic => None,
            _ if self.lo[j] == self.hi[j] => None,
            VarState::Lower if dj < -OPT_TOL => Some(1.0),
            VarState::Upper if dj > OPT_TOL => Some(-1.0),
            VarState::Free if dj < -OPT_TOL => Some(1.0),
            VarState::Free if dj > OPT_TOL => Some(-1.0),
            _ => None,
        }
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, f64)> {
        if bland {
            return (0..self.cols).find_map(|j| self.eligible(j).map(|dir| (j, dir)));
        }
        let mut best: Option<(usize, f64)> = None;
        let mut best_mag = 0.0;
        for j in 0..self.cols {
            if let Some(dir) = self.eligible(j) {
                let mag = self.d[j].abs();
                if mag > best_mag {
                    best_mag = mag;
                    best = Some((j, dir));
                }
            }
        }
        best
    }

    /// One simplex iteration. Returns the step length taken when it moved.
    fn iterate(&mut self, bland: bool) -> (Step, f64) {
        let Some((q, dir)) = self.choose_entering(bland) else {
            return (Step::Optimal, 0.0);
        };
        let mut theta =
            if self.lo[q].is_finite() && self.hi[q].is_finite() { self.hi[q] - self.lo[q] } else { f64::INFINITY };
        let mut leave: Option<(usize, bool)> = None;
        let mut leave_alpha = 0.0f64;
        for i in 0..self.rows {
            let tiq = self.at(i, q);
            if tiq.abs() <= PIVOT_TOL {
                continue;
            }
            let alpha = dir * tiq;
            let b = self.basis[i];
            let (ratio, to_upper) = if alpha > 0.0 {
                if !self.lo[b].is_finite() {
                    continue;
                }
                (((self.beta[i] - self.lo[b]) / alpha).max(0.0), false)
            } else {
                if !self.hi[b].is_finite() {
                    continue;
                }
                (((self.hi[b] - self.beta[i]) / -alpha).max(0.0), true)
            };
            let better = if ratio < theta - 1e-12 {
                true
            } else if ratio <= theta + 1e-12 {
                match leave {
                    None => ratio < theta,
                    Some((r, _)) if bland => b < self.basis[r],
                    Some(_) => alpha.abs() > leave_alpha.abs(),
                }
            } else {
                false
            };
            if better {
                theta = ratio;
                leave = Some((i, to_upper));
                leave_alpha = alpha;
            }
        }
        if theta == f64::INFINITY {
            return (Step::Unbounded(q, dir), 0.0);
        }
        // move the entering variable and update basic values
        let delta = dir * theta;
        if delta != 0.0 {
            for i in 0..self.rows {
                let tiq = self.t[i * self.cols + q];
                if tiq != 0.0 {
                    self.beta[i] -= delta * tiq;
                }
            }
        }
        match leave {
            None => {
                self.state[q] = if dir > 0.0 { VarState::Upper } else { VarState::Lower };
            }
            Some((r, to_upper)) => {
                let entering_value = self.nonbasic_value(q) + delta;
                let out = self.basis[r];
                self.state[out] = if to_upper { VarState::Upper } else { VarState::Lower };
                self.pivot(r, q);
                self.beta[r] = entering_value;
            }
        }
        self.pivots += 1;
        self.since_refactor += 1;
        (Step::Moved, theta)
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let cols = self.cols;
        let piv = self.t[r * cols + q];
        {
            let row = &mut self.t[r * cols..(r + 1) * cols];
            let inv = 1.0 / piv;
            row.iter_mut().for_each(|v| *v *= inv);
            row[q] = 1.0;
        }
        let (before, rest) = self.t.split_at_mut(r * cols);
        let (prow, after) = rest.split_at_mut(cols);
        for row in before.chunks_exact_mut(cols).chain(after.chunks_exact_mut(cols)) {
            let f = row[q];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
                row[q] = 0.0;
            }
        }
        let dq = self.d[q];
        if dq != 0.0 {
            for (v, p) in self.d.iter_mut().zip(prow.iter()) {
                *v -= dq * p;
            }
            self.d[q] = 0.0;
        }
        self.basis[r] = q;
        self.state[q] = VarState::Basic;
    }

    fn run(&mut self, pricing: PricingRule, max_pivots: usize) -> Result<Step> {
        let mut streak = 0usize;
        loop {
            if self.pivots >= max_pivots {
                return Err(Error::PivotLimit(max_pivots));
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let bland = pricing == PricingRule::Bland || streak >= DEGENERATE_STREAK;
            match self.iterate(bland) {
                (Step::Moved, theta) => {
                    if theta <= 1e-12 {
                        streak += 1;
                    } else {
                        streak = 0;
                    }
                }
                // confirm the verdict on freshly computed data
                (_, _) if self.since_refactor > 0 => self.refactor()?,
                (step, _) => return Ok(step),
            }
        }
    }

    fn values(&self) -> Vec<f64> {
        let mut x: Vec<f64> = (0..self.cols).map(|j| self.nonbasic_value(j)).collect();
        for i in 0..self.rows {
            x[self.basis[i]] = self.beta[i];
        }
        x
    }
}

pub fn solve_lp_with(problem: &LpProblem, options: &SimplexOptions) -> Result<LpSolution> {
    problem.validate()?;
    let mut spent = 0;
    if options.perturb {
        let run = simplex(&perturbed(problem), options)?;
        spent = run.tab.pivots;
        if run.status == LpStatus::Optimal {
            let mut tab = run.tab;
            if restore(&mut tab, problem)? {
                return Ok(finish(problem, &tab, LpStatus::Optimal, None, 0.0));
            }
        }
    }
    let mut run = simplex(problem, options)?;
    run.tab.pivots += spent;
    Ok(finish(problem, &run.tab, run.status, run.ray, run.infeasibility))
}

/// Relax every inequality and finite bound by a small amount that differs
/// from row to row, so that ratio-test ties (degenerate pivots) disappear.
fn perturbed(problem: &LpProblem) -> LpProblem {
    const GOLDEN: f64 = 0.618_033_988_749_895;
    let delta = |i: usize, scale: f64| 1e-7 * (1.0 + scale.abs()) * (1.0 + ((i + 1) as f64 * GOLDEN).fract());
    let mut p = problem.clone();
    for (i, c) in p.constraints.iter_mut().enumerate() {
        match c.relation {
            Relation::Le => c.rhs += delta(i, c.rhs),
            Relation::Ge => c.rhs -= delta(i, c.rhs),
            Relation::Eq => {}
        }
    }
    let rows = p.constraints.len();
    for j in 0..p.num_vars() {
        if p.lower[j] < p.upper[j] {
            if p.lower[j].is_finite() {
                p.lower[j] -= delta(rows + 2 * j, p.lower[j]);
            }
            if p.upper[j].is_finite() {
                p.upper[j] += delta(rows + 2 * j + 1, p.upper[j]);
            }
        }
    }
    p
}

/// Put the original data back under an optimal perturbed basis. Returns
/// whether that basis is still primal feasible, in which case it is optimal.
fn restore(tab: &mut Tableau, problem: &LpProblem) -> Result<bool> {
    let m = problem.num_vars();
    tab.lo[..m].copy_from_slice(&problem.lower);
    tab.hi[..m].copy_from_slice(&problem.upper);
    for (r, c) in tab.rhs.iter_mut().zip(&problem.constraints) {
        *r = c.rhs;
    }
    tab.refactor()?;
    for i in 0..tab.rows {
        let b = tab.basis[i];
        let v = tab.beta[i];
        if v < tab.lo[b] - 1e-9 * (1.0 + tab.lo[b].abs()) || v > tab.hi[b] + 1e-9 * (1.0 + tab.hi[b].abs()) {
            return Ok(false);
        }
    }
    Ok(tab.choose_entering(true).is_none())
}

struct Run {
    tab: Tableau,
    status: LpStatus,
    ray: Option<Vec<f64>>,
    infeasibility: f64,
}

fn simplex(problem: &LpProblem, options: &SimplexOptions) -> Result<Run> {
    let m = problem.num_vars();
    let rows = problem.constraints.len();

    let mut lo = problem.lower.clone();
    let mut hi = problem.upper.clone();
    let mut state: Vec<VarState> = (0..m)
        .map(|j| {
            if lo[j].is_finite() {
                VarState::Lower
            } else if hi[j].is_finite() {
                VarState::Upper
            } else {
                VarState::Free
            }
        })
        .collect();
    let x0: Vec<f64> = (0..m)
        .map(|j| match state[j] {
            VarState::Lower => lo[j],
            VarState::Upper => hi[j],
            _ => 0.0,
        })
        .collect();

    // logical bounds and starting residuals
    let mut artificial_rows = Vec::new();
    let mut residual = Vec::with_capacity(rows);
    for c in &problem.constraints {
        let r = c.rhs - c.coeffs.iter().zip(&x0).map(|(a, v)| a * v).sum::<f64>();
        let (slo, shi) = match c.relation {
            Relation::Le => (0.0, f64::INFINITY),
            Relation::Ge => (f64::NEG_INFINITY, 0.0),
            Relation::Eq => (0.0, 0.0),
        };
        lo.push(slo);
        hi.push(shi);
        residual.push(r);
    }
    for (i, &r) in residual.iter().enumerate() {
        let (slo, shi) = (lo[m + i], hi[m + i]);
        if r >= slo && r <= shi && !(slo == shi && r != 0.0) {
            state.push(VarState::Basic);
        } else {
            state.push(if r < slo { VarState::Lower } else { VarState::Upper });
            artificial_rows.push(i);
        }
    }
    let arts = artificial_rows.len();
    let cols = m + rows + arts;
    lo.extend(std::iter::repeat_n(0.0, arts));
    hi.extend(std::iter::repeat_n(f64::INFINITY, arts));
    state.extend(std::iter::repeat_n(VarState::Basic, arts));

    let mut t = vec![0.0; rows * cols];
    let mut beta = vec![0.0; rows];
    let mut basis = vec![0; rows];
    let mut art_of_row = vec![usize::MAX; rows];
    for (a, &i) in artificial_rows.iter().enumerate() {
        art_of_row[i] = m + rows + a;
    }
    for (i, c) in problem.constraints.iter().enumerate() {
        let row = &mut t[i * cols..(i + 1) * cols];
        row[..m].copy_from_slice(&c.coeffs);
        row[m + i] = 1.0;
        if art_of_row[i] == usize::MAX {
            basis[i] = m + i;
            beta[i] = residual[i];
        } else {
            // a x + s + sigma * art = b with s at its violated bound (0)
            let sigma = if residual[i] > 0.0 { 1.0 } else { -1.0 };
            row[art_of_row[i]] = sigma;
            basis[i] = art_of_row[i];
            beta[i] = residual[i].abs();
        }
    }

    // the starting basis holds sigma = -1 for some artificials; scale those rows
    let original = t.clone();
    for (i, &a) in art_of_row.iter().enumerate() {
        if a != usize::MAX && t[i * cols + a] < 0.0 {
            t[i * cols..(i + 1) * cols].iter_mut().for_each(|v| *v = -*v);
        }
    }

    let mut phase1_cost = vec![0.0; cols];
    phase1_cost[m + rows..].iter_mut().for_each(|c| *c = 1.0);
    let mut tab = Tableau {
        rows,
        cols,
        structural: m,
        original: original.clone(),
        rhs: problem.constraints.iter().map(|c| c.rhs).collect(),
        since_refactor: 0,
        t,
        beta,
        basis,
        state,
        lo,
        hi,
        cost: phase1_cost,
        d: vec![0.0; cols],
        pivots: 0,
    };

    let mut infeasibility = 0.0;
    if arts > 0 {
        tab.recompute_reduced_costs();
        tab.run(options.pricing, options.max_pivots)?;
        infeasibility = tab.objective().max(0.0);
        let scale = 1.0 + problem.constraints.iter().map(|c| c.rhs.abs()).fold(0.0, f64::max);
        if infeasibility > FEAS_TOL * scale {
            return Ok(Run { tab, status: LpStatus::Infeasible, ray: None, infeasibility });
        }
        // fix artificials at zero and drive basic ones out where possible
        for j in m + rows..cols {
            tab.hi[j] = 0.0;
            if tab.state[j] != VarState::Basic {
                tab.state[j] = VarState::Lower;
            }
        }
        for r in 0..rows {
            if tab.basis[r] >= m + rows {
                if let Some(q) = (0..m + rows)
                    .filter(|&j| tab.state[j] != VarState::Basic)
                    .max_by(|&a, &b| tab.at(r, a).abs().total_cmp(&tab.at(r, b).abs()).then(b.cmp(&a)))
                    .filter(|&q| tab.at(r, q).abs() > PIVOT_TOL)
                {
                    let out = tab.basis[r];
                    let value = tab.nonbasic_value(q);
                    tab.pivot(r, q);
                    tab.beta[r] = value;
                    tab.state[out] = VarState::Lower;
                }
            }
        }
    }

    let mut cost = problem.objective.clone();
    cost.resize(cols, 0.0);
    tab.cost = cost;
    tab.recompute_reduced_costs();
    match tab.run(options.pricing, options.max_pivots)? {
        Step::Unbounded(q, dir) => {
            let mut ray = vec![0.0; m];
            if q < m {
                ray[q] = dir;
            }
            for i in 0..rows {
                let b = tab.basis[i];
                if b < m {
                    ray[b] = -dir * tab.at(i, q);
                }
            }
            Ok(Run { tab, status: LpStatus::Unbounded, ray: Some(ray), infeasibility })
        }
        _ => Ok(Run { tab, status: LpStatus::Optimal, ray: None, infeasibility }),
    }
}

fn finish(
    problem: &LpProblem,
    tab: &Tableau,
    status: LpStatus,
    ray: Option<Vec<f64>>,
    infeasibility: f64,
) -> LpSolution {
    let m = tab.structural;
    let mut x = tab.values();
    x.truncate(m);
    let duals = (0..tab.rows).map(|i| -tab.d[m + i]).collect();
    LpSolution { status, objective: problem.objective_value(&x), x, duals, ray, infeasibility, pivots: tab.pivots }
}

/// Relaxed versus integral optimum of the binary monotone labeling problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegralityCheck {
    pub lp_objective: f64,
    pub ip_objective: f64,
    pub integral: bool,
}

/// Solve the misclassification problem with labels relaxed to `[0, 1]` and
/// compare with the exact binary optimum.
pub fn check_integrality(ds: &Dataset, active: &ActiveSet) -> Result<IntegralityCheck> {
    ds.require_model(NoiseModel::NoisyInput, "integrality check")?;
    let ip = solve_binary_labeling(ds, active)?;
    let lp = relaxed_labeling_lp(ds, active)?;
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Internal(format!("relaxed labeling LP ended {:?}", sol.status)));
    }
    let ones = ds.labels().iter().filter(|&&y| y == 1.0).count() as f64;
    let lp_objective = sol.objective + ones;
    Ok(IntegralityCheck {
        lp_objective,
        ip_objective: ip.objective,
        integral: (lp_objective - ip.objective).abs() <= 1e-7,
    })
}

/// `sum |Y_i - F_i|` with `F` in `[0, 1]` is linear: `-F_i` for a 1-label and
/// `+F_i` for a 0-label, plus the count of 1-labels. Monotonicity is imposed
/// along the covering edges of the order, with ties tied together.
pub fn relaxed_labeling_lp(ds: &Dataset, active: &ActiveSet) -> Result<LpProblem> {
    let n = ds.n();
    let g = order_graph(ds, active)?;
    let mut lp = LpProblem::new(ds.labels().iter().map(|&y| if y == 1.0 { -1.0 } else { 1.0 }).collect());
    for i in 0..n {
        lp.set_bounds(i, 0.0, 1.0)?;
    }
    let row = |a: usize, b: usize| {
        let mut r = vec![0.0; n];
        r[a] = 1.0;
        r[b] = -1.0;
        r
    };
    for members in &g.members {
        for w in members.windows(2) {
            lp.add_constraint(row(w[0], w[1]), Relation::Eq, 0.0)?;
        }
    }
    for &(u, v) in &g.edges {
        lp.add_constraint(row(g.members[u][0], g.members[v][0]), Relation::Le, 0.0)?;
    }
    Ok(lp)
}
