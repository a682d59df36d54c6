//! Exhaustive search over active sets of size `s`.
//!
//! Every admissible subset is a candidate; the winner minimizes the exact
//! fixed-set objective, ties going to the lexicographically smallest subset.
//! To keep this fast the search first scores each subset with a cheap lower
//! bound (a dual bound for squared error, a disjoint-violations count for
//! misclassification) and then solves subsets exactly in order of their
//! bound, stopping once no remaining bound can beat the best value found.
//! The result is identical to solving every subset.

use crate::bitset::BitMatrix;
use crate::error::{Error, Result};
use crate::exact::{binary_on_graph, class_stats, l2_on_graph, FitResult};
use crate::model::{ActiveSet, Dataset, NoiseModel};
use crate::order::OrderGraph;
use crate::par;

use super::lpsr::PairPatterns;
use super::subsets::{binomial, Combinations};
use super::{check_sparsity, validate_exclusions, Rule, SparseFit};

/// Largest number of subsets the search will enumerate.
pub const MAX_SUBSETS: u128 = 1_000_000;

const BATCH: usize = 16;
const DUAL_PASSES: usize = 40;

#[derive(Clone, Debug, PartialEq)]
pub struct IpirOptions {
    /// 0-based coordinate pairs that may not both be active.
    pub exclusions: Vec<(usize, usize)>,
    pub max_subsets: u128,
    /// Use lower bounds to skip subsets that cannot win. Off means every
    /// subset is solved exactly.
    pub prune: bool,
}

impl Default for IpirOptions {
    fn default() -> Self {
        Self { exclusions: Vec::new(), max_subsets: MAX_SUBSETS, prune: true }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IpirOutcome {
    pub fit: FitResult,
    /// Admissible subsets considered.
    pub subsets: usize,
    /// Subsets whose fixed-set problem was solved exactly.
    pub exact_solves: usize,
}

pub fn ipir_fit(ds: &Dataset, s: usize, rule: Rule) -> Result<SparseFit> {
    ipir_fit_with(ds, s, rule, &IpirOptions::default())
}

pub fn ipir_fit_with(ds: &Dataset, s: usize, rule: Rule, options: &IpirOptions) -> Result<SparseFit> {
    let outcome = ipir_search(ds, s, options)?;
    Ok(SparseFit::new(ds, outcome.fit, rule))
}

struct Search<'a> {
    ds: &'a Dataset,
    n: usize,
    /// `ge[k]` row `i`: samples `j` with `X_i[k] <= X_j[k]`.
    ge: Vec<BitMatrix>,
}

impl<'a> Search<'a> {
    fn new(ds: &'a Dataset) -> Self {
        let n = ds.n();
        let ge = (0..ds.d())
            .map(|k| {
                let mut m = BitMatrix::new(n, n);
                for i in 0..n {
                    let xi = ds.x(i)[k];
                    for j in 0..n {
                        if xi <= ds.x(j)[k] {
                            m.set(i, j, true);
                        }
                    }
                }
                m
            })
            .collect();
        Self { ds, n, ge }
    }

    fn successors(&self, subset: &[usize]) -> BitMatrix {
        let mut succ = self.ge[subset[0]].clone();
        for &k in &subset[1..] {
            for i in 0..self.n {
                for (a, b) in succ.row_mut(i).iter_mut().zip(self.ge[k].row(i)) {
                    *a &= b;
                }
            }
        }
        succ
    }

    fn exact(&self, subset: &[usize]) -> (Vec<f64>, f64) {
        let g = OrderGraph::from_successors(&self.successors(subset));
        match self.ds.noise_model() {
            NoiseModel::NoisyInput => binary_on_graph(&g, self.ds.labels()),
            NoiseModel::NoisyOutput => l2_on_graph(&g, self.ds.labels()),
        }
    }

    /// A lower bound on the exact objective; may stop early once it exceeds `cutoff`.
    fn lower_bound(&self, subset: &[usize], cutoff: f64) -> f64 {
        let succ = self.successors(subset);
        match self.ds.noise_model() {
            NoiseModel::NoisyInput => self.violation_matching(&succ),
            NoiseModel::NoisyOutput => l2_dual_bound(&OrderGraph::from_successors(&succ), self.ds.labels(), cutoff),
        }
    }

    /// Greedy set of disjoint pairs `i <= j` with labels 1 and 0; each needs
    /// at least one error.
    fn violation_matching(&self, succ: &BitMatrix) -> f64 {
        let labels = self.ds.labels();
        let mut free_zeros = vec![0u64; succ.row(0).len()];
        for (i, &y) in labels.iter().enumerate() {
            if y == 0.0 {
                free_zeros[i / 64] |= 1 << (i % 64);
            }
        }
        let mut matched = 0usize;
        for (i, &y) in labels.iter().enumerate() {
            if y != 1.0 {
                continue;
            }
            let hit = succ.row(i).iter().zip(&free_zeros).enumerate().find_map(|(w, (a, b))| {
                let m = a & b;
                (m != 0).then(|| w * 64 + m.trailing_zeros() as usize)
            });
            if let Some(j) = hit {
                free_zeros[j / 64] &= !(1 << (j % 64));
                matched += 1;
            }
        }
        matched as f64
    }
}

/// Lagrangian dual of unconstrained isotonic regression, improved by
/// coordinate ascent over edge multipliers. Any multipliers give a valid
/// bound; the box constraint only raises the primal.
fn l2_dual_bound(g: &OrderGraph, labels: &[f64], cutoff: f64) -> f64 {
    let stats = class_stats(g, labels);
    let k = g.classes();
    let inv = |c: usize| 0.5 / stats.weight[c];
    let mut grad = vec![0.0; k];
    let mut lambda = vec![0.0; g.edges.len()];
    let value = |grad: &[f64]| -> f64 {
        stats.within_ss + (0..k).map(|c| grad[c] * stats.mean[c] - grad[c] * grad[c] * inv(c) * 0.5).sum::<f64>()
    };
    let mut bound = value(&grad);
    for _ in 0..DUAL_PASSES {
        if bound > cutoff {
            break;
        }
        for (e, &(u, v)) in g.edges.iter().enumerate() {
            let fu = stats.mean[u] - grad[u] * inv(u);
            let fv = stats.mean[v] - grad[v] * inv(v);
            let next = (lambda[e] + (fu - fv) / (inv(u) + inv(v))).max(0.0);
            let step = next - lambda[e];
            if step != 0.0 {
                lambda[e] = next;
                grad[u] += step;
                grad[v] -= step;
            }
        }
        let updated = value(&grad);
        let gained = updated - bound;
        bound = bound.max(updated);
        if gained <= 1e-9 * bound.abs().max(1.0) {
            break;
        }
    }
    bound
}

fn tie_tol(best: f64) -> f64 {
    1e-9 * best.abs().max(1.0)
}

/// `a` beats `b`: strictly smaller beyond tolerance, or tied and earlier.
fn beats(a: (f64, usize), b: (f64, usize)) -> bool {
    let tol = tie_tol(b.0);
    a.0 < b.0 - tol || ((a.0 - b.0).abs() <= tol && a.1 < b.1)
}

pub fn ipir_search(ds: &Dataset, s: usize, options: &IpirOptions) -> Result<IpirOutcome> {
    let d = ds.d();
    check_sparsity(s, d)?;
    validate_exclusions(&options.exclusions, d)?;
    let total = binomial(d, s);
    if total > options.max_subsets {
        return Err(Error::SizeGuard(format!(
            "C({d}, {s}) = {total} subsets exceeds the limit of {}",
            options.max_subsets
        )));
    }
    let mut conflict = vec![vec![false; d]; d];
    for &(i, j) in &options.exclusions {
        conflict[i][j] = true;
        conflict[j][i] = true;
    }
    let subsets: Vec<Vec<usize>> =
        Combinations::new(d, s).filter(|c| !c.iter().any(|&i| c.iter().any(|&j| conflict[i][j]))).collect();
    if subsets.is_empty() {
        return Err(Error::Argument(format!("no subset of size {s} avoids every exclusion pair")));
    }
    let search = Search::new(ds);
    let finish = |idx: usize, fitted: Vec<f64>, objective: f64, exact_solves: usize| IpirOutcome {
        fit: FitResult { fitted, objective, active: ActiveSet::from_sorted_unchecked(subsets[idx].clone()) },
        subsets: subsets.len(),
        exact_solves,
    };

    if !options.prune {
        let all = par::map_slice(&subsets, |c| search.exact(c));
        let mut best = 0;
        for i in 1..all.len() {
            if beats((all[i].1, i), (all[best].1, best)) {
                best = i;
            }
        }
        let (fitted, objective) = all.into_iter().nth(best).expect("non-empty");
        return Ok(finish(best, fitted, objective, subsets.len()));
    }

    // incumbent: the admissible subset built greedily from separation scores
    let rows: Vec<usize> = (0..ds.n()).collect();
    let scores = PairPatterns::build(ds, &rows).scores();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut greedy: Vec<usize> = Vec::with_capacity(s);
    for k in order {
        if greedy.len() < s && !greedy.iter().any(|&g| conflict[g][k]) {
            greedy.push(k);
        }
    }
    greedy.sort_unstable();
    let incumbent_idx = subsets.iter().position(|c| *c == greedy).unwrap_or(0);
    let (mut best_fit, mut best_obj) = search.exact(&subsets[incumbent_idx]);
    let mut best_idx = incumbent_idx;
    let mut exact_solves = 1;

    let cutoff = best_obj + tie_tol(best_obj);
    let bounds = par::map_indexed(subsets.len(), |i| {
        if i == incumbent_idx {
            f64::NEG_INFINITY
        } else {
            search.lower_bound(&subsets[i], cutoff)
        }
    });
    let mut queue: Vec<usize> = (0..subsets.len()).filter(|&i| i != incumbent_idx && bounds[i] <= cutoff).collect();
    queue.sort_by(|&a, &b| bounds[a].total_cmp(&bounds[b]).then(a.cmp(&b)));

    let mut pos = 0;
    while pos < queue.len() {
        let limit = best_obj + tie_tol(best_obj);
        let batch: Vec<usize> = queue[pos..].iter().take(BATCH).copied().take_while(|&i| bounds[i] <= limit).collect();
        if batch.is_empty() {
            break;
        }
        pos += batch.len();
        let solved = par::map_slice(&batch, |&i| search.exact(&subsets[i]));
        exact_solves += batch.len();
        for (&i, (fitted, obj)) in batch.iter().zip(solved) {
            if beats((obj, i), (best_obj, best_idx)) {
                best_obj = obj;
                best_idx = i;
                best_fit = fitted;
            }
        }
    }
    Ok(finish(best_idx, best_fit, best_obj, exact_solves))
}
