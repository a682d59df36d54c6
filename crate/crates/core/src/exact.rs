//! Exact monotone fits for a fixed active set.
//!
//! Binary labels (noisy-input model) are fitted by a maximum-closure minimum
//! cut. Real labels (noisy-output model) are fitted by recursive partitioning:
//! each block is split along the maximum-gain upper set relative to its mean
//! until no split improves, which yields the exact L2 isotonic projection.
//! Both work on the tie-class quotient of the dominance order, so samples
//! that coincide on the active coordinates always receive the same value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{max_flow, FlowNetwork};
use crate::model::{build_comparability, ActiveSet, Dataset, NoiseModel};
use crate::order::OrderGraph;

/// Fitted values for every training sample plus the attained objective.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub fitted: Vec<f64>,
    /// Misclassification count (binary) or residual sum of squares (L2).
    pub objective: f64,
    pub active: ActiveSet,
}

/// Largest sample count the exhaustive oracle accepts.
pub const BRUTE_FORCE_MAX_N: usize = 20;

pub(crate) fn order_graph(ds: &Dataset, active: &ActiveSet) -> Result<OrderGraph> {
    let rel = build_comparability(ds, active)?;
    Ok(OrderGraph::from_successors(rel.successors()))
}

/// Minimum-misclassification monotone binary labeling under `active`.
///
/// Among optimal labelings the one with the fewest 1-labels is returned.
pub fn solve_binary_labeling(ds: &Dataset, active: &ActiveSet) -> Result<FitResult> {
    ds.require_model(NoiseModel::NoisyInput, "binary labeling")?;
    let g = order_graph(ds, active)?;
    let (fitted, objective) = binary_on_graph(&g, ds.labels());
    Ok(FitResult { fitted, objective, active: active.clone() })
}

/// L2 isotonic regression with values in `[0, 1]` under `active`.
pub fn solve_l2_isotonic(ds: &Dataset, active: &ActiveSet) -> Result<FitResult> {
    ds.require_model(NoiseModel::NoisyOutput, "L2 isotonic regression")?;
    let g = order_graph(ds, active)?;
    let (fitted, objective) = l2_on_graph(&g, ds.labels());
    Ok(FitResult { fitted, objective, active: active.clone() })
}

/// Dispatch on the dataset's noise model.
pub fn solve_fixed(ds: &Dataset, active: &ActiveSet) -> Result<FitResult> {
    match ds.noise_model() {
        NoiseModel::NoisyInput => solve_binary_labeling(ds, active),
        NoiseModel::NoisyOutput => solve_l2_isotonic(ds, active),
    }
}

/// Exhaustive oracle: enumerates every labeling, keeps monotone ones, and
/// returns the minimum-error one with the fewest 1-labels.
pub fn brute_force_binary(ds: &Dataset, active: &ActiveSet) -> Result<FitResult> {
    ds.require_model(NoiseModel::NoisyInput, "brute-force binary labeling")?;
    let n = ds.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::SizeGuard(format!("brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {n}")));
    }
    let rel = build_comparability(ds, active)?;
    let succ: Vec<u32> =
        (0..n).map(|i| (0..n).filter(|&j| rel.dominance(i, j)).fold(0u32, |m, j| m | 1 << j)).collect();
    let ones: u32 = (0..n).filter(|&i| ds.y(i) == 1.0).fold(0, |m, i| m | 1 << i);
    let mut best: Option<(u32, u32, u32)> = None;
    for mask in 0u32..(1u32 << n) {
        let closed = (0..n).all(|i| mask >> i & 1 == 0 || succ[i] & !mask == 0);
        if !closed {
            continue;
        }
        let key = ((mask ^ ones).count_ones(), mask.count_ones(), mask);
        if best.is_none_or(|b| key < b) {
            best = Some(key);
        }
    }
    let (errors, _, mask) = best.expect("the empty labeling is always monotone");
    let fitted = (0..n).map(|i| f64::from(mask >> i & 1)).collect();
    Ok(FitResult { fitted, objective: errors as f64, active: active.clone() })
}

/// Binary labeling on a quotient graph; returns per-sample labels and error count.
pub(crate) fn binary_on_graph(g: &OrderGraph, labels: &[f64]) -> (Vec<f64>, f64) {
    let k = g.classes();
    let weight: Vec<f64> = g.members.iter().map(|m| m.iter().map(|&i| 2.0 * labels[i] - 1.0).sum()).collect();
    let (s, t) = (k, k + 1);
    let mut net = FlowNetwork::new(k + 2, s, t).expect("valid terminals");
    for (c, &w) in weight.iter().enumerate() {
        if w > 0.0 {
            net.add_arc(s, c, w).expect("valid arc");
        } else if w < 0.0 {
            net.add_arc(c, t, -w).expect("valid arc");
        }
    }
    for &(u, v) in &g.edges {
        net.add_arc(u, v, f64::INFINITY).expect("valid arc");
    }
    let cut = max_flow(&net);
    let mut fitted = vec![0.0; labels.len()];
    for (c, members) in g.members.iter().enumerate() {
        if cut.source_side[c] {
            for &i in members {
                fitted[i] = 1.0;
            }
        }
    }
    let errors = fitted.iter().zip(labels).filter(|(f, y)| f != y).count();
    (fitted, errors as f64)
}

/// Per-class weights, means and the within-class sum of squares.
pub(crate) struct ClassStats {
    pub weight: Vec<f64>,
    pub mean: Vec<f64>,
    pub within_ss: f64,
}

pub(crate) fn class_stats(g: &OrderGraph, labels: &[f64]) -> ClassStats {
    let mut weight = Vec::with_capacity(g.classes());
    let mut mean = Vec::with_capacity(g.classes());
    let mut within_ss = 0.0;
    for m in &g.members {
        let w = m.len() as f64;
        let mu = m.iter().map(|&i| labels[i]).sum::<f64>() / w;
        within_ss += m.iter().map(|&i| (labels[i] - mu).powi(2)).sum::<f64>();
        weight.push(w);
        mean.push(mu);
    }
    ClassStats { weight, mean, within_ss }
}

/// Unconstrained (no box) weighted isotonic regression on the class DAG.
pub(crate) fn isotonic_classes(g: &OrderGraph, stats: &ClassStats) -> Vec<f64> {
    let k = g.classes();
    let mut out_edges = vec![Vec::new(); k];
    for &(u, v) in &g.edges {
        out_edges[u].push(v);
    }
    let mut value = vec![0.0; k];
    let mut pos = vec![usize::MAX; k];
    let mut stack: Vec<Vec<usize>> = vec![(0..k).collect()];
    while let Some(block) = stack.pop() {
        let total_w: f64 = block.iter().map(|&c| stats.weight[c]).sum();
        let mu = block.iter().map(|&c| stats.weight[c] * stats.mean[c]).sum::<f64>() / total_w;
        if block.len() == 1 {
            value[block[0]] = mu;
            continue;
        }
        match split_block(&block, mu, &out_edges, stats, &mut pos) {
            Some((upper, lower)) => {
                stack.push(upper);
                stack.push(lower);
            }
            None => {
                for &c in &block {
                    value[c] = mu;
                }
            }
        }
    }
    value
}

/// Find the upper subset of `block` with the largest positive total
/// `w * (mean - mu)`; `None` when no subset has positive gain.
fn split_block(
    block: &[usize],
    mu: f64,
    out_edges: &[Vec<usize>],
    stats: &ClassStats,
    pos: &mut [usize],
) -> Option<(Vec<usize>, Vec<usize>)> {
    let m = block.len();
    for (l, &c) in block.iter().enumerate() {
        pos[c] = l;
    }
    let (s, t) = (m, m + 1);
    let mut net = FlowNetwork::new(m + 2, s, t).expect("valid terminals");
    let mut scale = 0.0;
    let gains: Vec<f64> = block.iter().map(|&c| stats.weight[c] * (stats.mean[c] - mu)).collect();
    for (l, &gain) in gains.iter().enumerate() {
        scale += gain.abs();
        if gain > 0.0 {
            net.add_arc(s, l, gain).expect("valid arc");
        } else if gain < 0.0 {
            net.add_arc(l, t, -gain).expect("valid arc");
        }
    }
    for (l, &c) in block.iter().enumerate() {
        for &v in &out_edges[c] {
            if pos[v] != usize::MAX {
                net.add_arc(l, pos[v], f64::INFINITY).expect("valid arc");
            }
        }
    }
    let cut = max_flow(&net);
    for &c in block {
        pos[c] = usize::MAX;
    }
    let gain: f64 = (0..m).filter(|&l| cut.source_side[l]).map(|l| gains[l]).sum();
    if gain <= 1e-12 * scale.max(1e-300) {
        return None;
    }
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for (l, &c) in block.iter().enumerate() {
        if cut.source_side[l] {
            upper.push(c);
        } else {
            lower.push(c);
        }
    }
    if upper.is_empty() || lower.is_empty() {
        return None;
    }
    Some((upper, lower))
}

/// L2 fit on a quotient graph with values clipped to `[0, 1]`.
///
/// Clipping the unconstrained isotonic solution gives the box-constrained
/// projection, since the box is a product of intervals applied pointwise.
pub(crate) fn l2_on_graph(g: &OrderGraph, labels: &[f64]) -> (Vec<f64>, f64) {
    let stats = class_stats(g, labels);
    let values = isotonic_classes(g, &stats);
    let mut fitted = vec![0.0; labels.len()];
    for (c, members) in g.members.iter().enumerate() {
        let v = values[c].clamp(0.0, 1.0);
        for &i in members {
            fitted[i] = v;
        }
    }
    let objective = fitted.iter().zip(labels).map(|(f, y)| (y - f).powi(2)).sum();
    (fitted, objective)
}

/// Largest violation of the L2 optimality conditions for unclipped class
/// values: order feasibility, level-set means, and positive-gain upper subsets
/// within each level set.
#[cfg(test)]
pub(crate) fn l2_kkt_violation(g: &OrderGraph, stats: &ClassStats, values: &[f64]) -> f64 {
    let k = g.classes();
    let mut worst: f64 = 0.0;
    for &(u, v) in &g.edges {
        worst = worst.max(values[u] - values[v]);
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out_edges = vec![Vec::new(); k];
    for &(u, v) in &g.edges {
        out_edges[u].push(v);
    }
    let mut pos = vec![usize::MAX; k];
    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < k && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let level: Vec<usize> = order[start..end].to_vec();
        let mu = values[level[0]];
        let w: f64 = level.iter().map(|&c| stats.weight[c]).sum();
        let mean = level.iter().map(|&c| stats.weight[c] * stats.mean[c]).sum::<f64>() / w;
        worst = worst.max((mean - mu).abs());
        if level.len() > 1 {
            if let Some((upper, _)) = split_block(&level, mu, &out_edges, stats, &mut pos) {
                let gain: f64 = upper.iter().map(|&c| stats.weight[c] * (stats.mean[c] - mu)).sum();
                worst = worst.max(gain);
            }
        }
        start = end;
    }
    worst
}
