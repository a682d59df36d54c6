//! LP-based support recovery.
//!
//! Each ordered pair `(i, j)` with `Y_i > Y_j` that differs somewhere is
//! described by its pattern `a = q(i, j, .)`. At the optimum the correction
//! variables of a pair collapse to `max(0, 1 - a.v)`, so the LP is
//! `min sum_p w_p max(0, 1 - a_p.v)` over `sum v = s, 0 <= v <= 1`, with
//! identical patterns merged into weights `w_p`. That problem is solved
//! through its dual, which has only `d` rows, and `v` is read off the duals.
//! With `s = 1` every hinge is inactive (`a.v <= sum v = 1`) and the problem
//! is linear in `v`.

use std::collections::BTreeMap;

use crate::bitset::{ones, words_for};
use crate::error::{arg, Error, Result};
use crate::lp::{solve_lp, solve_lp_with, LpProblem, LpStatus, Relation, SimplexOptions};
use crate::model::{ActiveSet, Dataset};

use super::{check_sparsity, RecoveryConfig};

/// Distinct pair patterns with their multiplicities.
#[derive(Clone, Debug)]
pub(crate) struct PairPatterns {
    pub d: usize,
    pub patterns: Vec<Vec<u64>>,
    pub weights: Vec<f64>,
    pub pairs: usize,
}

impl PairPatterns {
    pub fn build(ds: &Dataset, rows: &[usize]) -> Self {
        let d = ds.d();
        let words = words_for(d);
        let mut map: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
        let mut pairs = 0;
        let mut pattern = vec![0u64; words];
        for &i in rows {
            let (xi, yi) = (ds.x(i), ds.y(i));
            for &j in rows {
                if yi <= ds.y(j) {
                    continue;
                }
                pattern.iter_mut().for_each(|w| *w = 0);
                let xj = ds.x(j);
                let mut any = false;
                for k in 0..d {
                    if xi[k] > xj[k] {
                        pattern[k / 64] |= 1 << (k % 64);
                        any = true;
                    }
                }
                if any {
                    pairs += 1;
                    *map.entry(pattern.clone()).or_insert(0) += 1;
                }
            }
        }
        let (patterns, weights) = map.into_iter().map(|(p, w)| (p, w as f64)).unzip();
        Self { d, patterns, weights, pairs }
    }

    /// Weighted number of pairs that coordinate `k` separates.
    pub fn scores(&self) -> Vec<f64> {
        let mut n = vec![0.0; self.d];
        for (p, w) in self.patterns.iter().zip(&self.weights) {
            for k in ones(p) {
                n[k] += w;
            }
        }
        n
    }

    /// `sum_p w_p max(0, 1 - a_p.v)`.
    pub fn objective(&self, v: &[f64]) -> f64 {
        self.patterns
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * (1.0 - ones(p).map(|k| v[k]).sum::<f64>()).max(0.0))
            .sum()
    }
}

/// Everything the support LP produced.
#[derive(Clone, Debug, PartialEq)]
pub struct LpsrOutcome {
    pub active: ActiveSet,
    /// Optimal `v`, one entry per coordinate.
    pub v: Vec<f64>,
    /// Total correction `sum c` at the optimum.
    pub objective: f64,
    /// Constrained pairs and their distinct patterns.
    pub pairs: usize,
    pub patterns: usize,
    pub pivots: usize,
}

pub fn lpsr(ds: &Dataset, s: usize) -> Result<ActiveSet> {
    Ok(lpsr_detailed(ds, s)?.active)
}

pub fn lpsr_detailed(ds: &Dataset, s: usize) -> Result<LpsrOutcome> {
    check_sparsity(s, ds.d())?;
    let rows: Vec<usize> = (0..ds.n()).collect();
    let pp = PairPatterns::build(ds, &rows);
    let (v, objective, pivots) = if pp.patterns.is_empty() {
        // nothing to separate: every feasible v is optimal, take the first s
        ((0..ds.d()).map(|k| if k < s { 1.0 } else { 0.0 }).collect(), 0.0, 0)
    } else if s == 1 {
        single_round(&pp, &vec![false; ds.d()])?
    } else {
        hinge_dual(&pp, s)?
    };
    let active = top_coordinates(&v, s, &vec![false; ds.d()]);
    Ok(LpsrOutcome { active, v, objective, pairs: pp.pairs, patterns: pp.patterns.len(), pivots })
}

/// Correction objective of `v` for the support LP of `ds`.
pub fn lpsr_objective(ds: &Dataset, v: &[f64]) -> Result<f64> {
    if v.len() != ds.d() {
        return arg(format!("v has {} entries for d = {}", v.len(), ds.d()));
    }
    let rows: Vec<usize> = (0..ds.n()).collect();
    Ok(PairPatterns::build(ds, &rows).objective(v))
}

fn quantize(x: f64) -> i64 {
    (x * 1e9).round() as i64
}

/// The `s` largest entries, ties to the smaller index.
fn top_coordinates(v: &[f64], s: usize, pinned: &[bool]) -> ActiveSet {
    let mut order: Vec<usize> = (0..v.len()).filter(|&k| !pinned[k]).collect();
    order.sort_by_key(|&k| (std::cmp::Reverse(quantize(v[k])), k));
    order.truncate(s);
    order.sort_unstable();
    ActiveSet::from_sorted_unchecked(order)
}

/// The `s = 1` problem: maximize `sum_k N_k v_k` over the simplex with
/// pinned coordinates fixed at zero.
fn single_round(pp: &PairPatterns, pinned: &[bool]) -> Result<(Vec<f64>, f64, usize)> {
    let d = pp.d;
    let scores = pp.scores();
    let mut lp = LpProblem::new(scores.iter().map(|n| -n).collect());
    for k in 0..d {
        lp.set_bounds(k, 0.0, if pinned[k] { 0.0 } else { 1.0 })?;
    }
    lp.add_constraint(vec![1.0; d], Relation::Eq, 1.0)?;
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Internal(format!("single-coordinate support LP ended {:?}", sol.status)));
    }
    let total: f64 = pp.weights.iter().sum();
    Ok((sol.x, total + sol.objective, sol.pivots))
}

/// Solve `max sum_p y_p + s mu - sum_k u_k` subject to
/// `sum_p a_pk y_p + mu - u_k <= 0`, `0 <= y_p <= w_p`, `u >= 0`; the row
/// duals are the optimal `v`.
///
/// Only patterns whose hinge can be active enter the LP. Starting from the
/// top-scoring coordinates, patterns with `a.v < 1` at the current `v` are
/// added until none is left out; patterns left out sit at `y_p = 0` with
/// nonnegative reduced cost, so the restricted optimum is the full one.
fn hinge_dual(pp: &PairPatterns, s: usize) -> Result<(Vec<f64>, f64, usize)> {
    let d = pp.d;
    let dot = |p: usize, v: &[f64]| ones(&pp.patterns[p]).map(|k| v[k]).sum::<f64>();
    let scores = pp.scores();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut v = vec![0.0; d];
    order[..s].iter().for_each(|&k| v[k] = 1.0);
    let mut in_lp = vec![false; pp.patterns.len()];
    let mut columns: Vec<usize> = Vec::new();
    let mut pivots = 0;
    loop {
        let before = columns.len();
        for p in 0..pp.patterns.len() {
            if !in_lp[p] && dot(p, &v) < 1.0 - 1e-9 {
                in_lp[p] = true;
                columns.push(p);
            }
        }
        if columns.len() == before && before > 0 {
            break;
        }
        if columns.is_empty() {
            // every pair is already separated: zero correction is optimal
            return Ok((v, 0.0, 0));
        }
        columns.sort_unstable();
        let sol = restricted_dual(pp, &columns, s)?;
        pivots += sol.1;
        v = sol.0;
        let optimum = sol.2;
        let attained = pp.objective(&v);
        if (attained - optimum).abs() <= 1e-6 * optimum.abs().max(1.0) {
            let sum: f64 = v.iter().sum();
            if (sum - s as f64).abs() > 1e-6 {
                return Err(Error::Internal(format!("support LP returned sum v = {sum}, expected {s}")));
            }
            return Ok((v, attained, pivots));
        }
    }
    Err(Error::Internal("support LP certificate failed: no violated pattern left but the gap is open".into()))
}

/// The dual LP over a subset of patterns; returns `(v, pivots, optimum)`.
fn restricted_dual(pp: &PairPatterns, columns: &[usize], s: usize) -> Result<(Vec<f64>, usize, f64)> {
    let d = pp.d;
    let p = columns.len();
    let m = p + 1 + d;
    let mut objective = vec![-1.0; p];
    objective.push(-(s as f64));
    objective.extend(std::iter::repeat_n(1.0, d));
    let mut lp = LpProblem::new(objective);
    for (j, &c) in columns.iter().enumerate() {
        lp.set_bounds(j, 0.0, pp.weights[c])?;
    }
    lp.set_bounds(p, f64::NEG_INFINITY, f64::INFINITY)?;
    let mut rows = vec![vec![0.0; m]; d];
    for (j, &c) in columns.iter().enumerate() {
        for k in ones(&pp.patterns[c]) {
            rows[k][j] = 1.0;
        }
    }
    for (k, mut row) in rows.into_iter().enumerate() {
        row[p] = 1.0;
        row[p + 1 + k] = -1.0;
        lp.add_constraint(row, Relation::Le, 0.0)?;
    }
    let sol = solve_lp_with(&lp, &SimplexOptions { perturb: true, ..SimplexOptions::default() })?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Internal(format!("support LP dual ended {:?}", sol.status)));
    }
    let v = sol.duals.iter().map(|y| (-y).clamp(0.0, 1.0)).collect();
    Ok((v, sol.pivots, -sol.objective))
}

/// Sequential recovery: `s` single-coordinate rounds, pinning each chosen
/// coordinate and its exclusion partners to zero afterwards.
pub fn slpsr(ds: &Dataset, s: usize, config: &RecoveryConfig) -> Result<ActiveSet> {
    let d = ds.d();
    check_sparsity(s, d)?;
    config.validate(d)?;
    if config.fresh_folds && ds.n() < s {
        return arg(format!("cannot split {} samples into {s} folds", ds.n()));
    }
    let mut pinned = vec![false; d];
    let mut chosen = Vec::with_capacity(s);
    let all: Vec<usize> = (0..ds.n()).collect();
    let shared = (!config.fresh_folds).then(|| PairPatterns::build(ds, &all));
    for round in 0..s {
        if pinned.iter().all(|&p| p) {
            return arg(format!(
                "only {} coordinates could be selected before exclusions ruled out the rest (s = {s})",
                chosen.len()
            ));
        }
        let fold;
        let pp = match &shared {
            Some(pp) => pp,
            None => {
                let (lo, hi) = (round * ds.n() / s, (round + 1) * ds.n() / s);
                fold = PairPatterns::build(ds, &all[lo..hi]);
                &fold
            }
        };
        let v = if pp.patterns.is_empty() { vec![0.0; d] } else { single_round(pp, &pinned)?.0 };
        let k = top_coordinates(&v, 1, &pinned).indices()[0];
        chosen.push(k);
        pinned[k] = true;
        for j in config.partners(k) {
            pinned[j] = true;
        }
    }
    ActiveSet::new(chosen, d)
}

/// The support LP written out in full (one correction variable per pair and
/// separating coordinate), for cross-checking on small inputs. Variables are
/// `v_1..v_d` followed by the corrections.
pub fn lpsr_full_problem(ds: &Dataset, s: usize) -> Result<LpProblem> {
    check_sparsity(s, ds.d())?;
    let d = ds.d();
    let mut terms: Vec<Vec<usize>> = Vec::new();
    for i in 0..ds.n() {
        for j in 0..ds.n() {
            if ds.y(i) > ds.y(j) {
                let ks: Vec<usize> = (0..d).filter(|&k| ds.x(i)[k] > ds.x(j)[k]).collect();
                if !ks.is_empty() {
                    terms.push(ks);
                }
            }
        }
    }
    let corrections: usize = terms.iter().map(Vec::len).sum();
    let m = d + corrections;
    let mut objective = vec![0.0; d];
    objective.extend(std::iter::repeat_n(1.0, corrections));
    let mut lp = LpProblem::new(objective);
    for k in 0..d {
        lp.set_bounds(k, 0.0, 1.0)?;
    }
    let mut eq = vec![0.0; m];
    eq[..d].iter_mut().for_each(|c| *c = 1.0);
    lp.add_constraint(eq, Relation::Eq, s as f64)?;
    let mut next = d;
    for ks in terms {
        let mut row = vec![0.0; m];
        for k in ks {
            row[k] = 1.0;
            row[next] = 1.0;
            next += 1;
        }
        lp.add_constraint(row, Relation::Ge, 1.0)?;
    }
    Ok(lp)
}
