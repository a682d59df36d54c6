//! Counting monotone labelings of point sets, plus the grid-cell counts used
//! in bounding them.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::algorithms::subsets::binomial;
use crate::error::{arg, Error, Result};
use crate::par;
use crate::rng::{stream, trial_stream};

/// Largest poset accepted for ideal counting.
pub const MAX_POSET: usize = 30;
/// Largest poset and label count accepted for `m`-labeling counts.
pub const MAX_M_POSET: usize = 20;
pub const MAX_LABELS: usize = 6;

/// Points under the componentwise order on all coordinates. Equal points
/// are tied and must share a label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointPoset {
    n: usize,
    /// `up[i]`: every other `j` with `x_i <= x_j`.
    up: Vec<u32>,
    /// `down[i]`: every other `j` with `x_j <= x_i`.
    down: Vec<u32>,
}

impl PointPoset {
    pub fn new(points: &[Vec<f64>]) -> Result<Self> {
        let n = points.len();
        Self::check_size(n)?;
        let d = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != d || p.iter().any(|v| !v.is_finite())) {
            return arg("points must be finite and share one dimension");
        }
        let leq = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| x <= y);
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && leq(&points[i], &points[j]) {
                    pairs.push((i, j));
                }
            }
        }
        Self::from_relation(n, &pairs)
    }

    /// The preorder generated by `pairs` (`(i, j)` meaning `x_i <= x_j`).
    pub fn from_relation(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::check_size(n)?;
        let mut up = vec![0u32; n];
        for &(i, j) in pairs {
            if i >= n || j >= n {
                return arg(format!("relation pair ({i}, {j}) out of range for n = {n}"));
            }
            if i != j {
                up[i] |= 1 << j;
            }
        }
        // transitive closure
        for k in 0..n {
            for i in 0..n {
                if up[i] >> k & 1 == 1 {
                    up[i] |= up[k];
                }
            }
        }
        for (i, u) in up.iter_mut().enumerate() {
            *u &= !(1 << i);
        }
        let mut down = vec![0u32; n];
        for i in 0..n {
            for j in 0..n {
                if up[i] >> j & 1 == 1 {
                    down[j] |= 1 << i;
                }
            }
        }
        Ok(Self { n, up, down })
    }

    fn check_size(n: usize) -> Result<()> {
        if n > MAX_POSET {
            return Err(Error::SizeGuard(format!("posets are limited to {MAX_POSET} points, got {n}")));
        }
        Ok(())
    }

    /// `n` points drawn uniformly from the unit cube.
    pub fn random(n: usize, d: usize, rng: &mut crate::rng::Rng) -> Result<Self> {
        let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random()).collect()).collect();
        Self::new(&pts)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        i == j || self.up[i] >> j & 1 == 1
    }

    fn full(&self) -> u32 {
        if self.n == 32 {
            u32::MAX
        } else {
            (1u32 << self.n) - 1
        }
    }

    /// Whether `mask` is closed downward.
    pub fn is_down_set(&self, mask: u32) -> bool {
        (0..self.n).all(|i| mask >> i & 1 == 0 || self.down[i] & !mask == 0)
    }
}

/// `L(m)`: the number of order-preserving maps into `{1..m}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelingCount {
    pub m: usize,
    pub count: BigUint,
}

/// Number of monotone 0/1 labelings, i.e. of down-sets.
///
/// Splits on one element at a time (either it and everything above it is
/// labeled 1, or it and everything below is labeled 0), factors the rest
/// into connected components, and memoizes on the remaining element set.
pub fn count_binary_labelings(poset: &PointPoset) -> LabelingCount {
    let mut memo = HashMap::new();
    LabelingCount { m: 2, count: count_ideals(poset, poset.full(), &mut memo) }
}

fn count_ideals(p: &PointPoset, set: u32, memo: &mut HashMap<u32, BigUint>) -> BigUint {
    if set == 0 {
        return BigUint::from(1u8);
    }
    if let Some(c) = memo.get(&set) {
        return c.clone();
    }
    let comps = components(p, set);
    let result = if comps.len() > 1 {
        comps.into_iter().map(|c| count_ideals(p, c, memo)).product()
    } else {
        // split on the element comparable to the most others
        let x = (0..p.n)
            .filter(|&i| set >> i & 1 == 1)
            .max_by_key(|&i| (((p.up[i] | p.down[i]) & set).count_ones(), std::cmp::Reverse(i)))
            .expect("non-empty set");
        let bit = 1u32 << x;
        let labeled_one = set & !(p.up[x] | bit);
        let labeled_zero = set & !(p.down[x] | bit);
        count_ideals(p, labeled_one, memo) + count_ideals(p, labeled_zero, memo)
    };
    memo.insert(set, result.clone());
    result
}

fn components(p: &PointPoset, set: u32) -> Vec<u32> {
    let mut left = set;
    let mut out = Vec::new();
    while left != 0 {
        let mut comp = left & left.wrapping_neg();
        let mut frontier = comp;
        while frontier != 0 {
            let i = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let next = (p.up[i] | p.down[i]) & set & !comp;
            comp |= next;
            frontier |= next;
        }
        out.push(comp);
        left &= !comp;
    }
    out
}

/// Exhaustive oracle: filter all `2^n` subsets for down-sets.
pub fn count_binary_labelings_naive(poset: &PointPoset) -> Result<u64> {
    if poset.n > MAX_M_POSET {
        return Err(Error::SizeGuard(format!("naive counting is limited to {MAX_M_POSET} points")));
    }
    Ok((0..=poset.full()).filter(|&m| poset.is_down_set(m)).count() as u64)
}

/// Number of order-preserving maps into `{1..m}`.
///
/// Such a map is a chain of down-sets `I_1 <= ... <= I_(m-1)` (`I_k` holds
/// the points labeled at most `k`), counted by repeated subset-sum
/// transforms over the down-set indicator.
pub fn count_m_labelings(poset: &PointPoset, m: usize) -> Result<LabelingCount> {
    if m == 0 {
        return arg("label count m must be at least 1");
    }
    if poset.n > MAX_M_POSET || m > MAX_LABELS {
        return Err(Error::SizeGuard(format!(
            "m-labeling counts are limited to n <= {MAX_M_POSET} and m <= {MAX_LABELS}, got n = {}, m = {m}",
            poset.n
        )));
    }
    if m == 1 {
        return Ok(LabelingCount { m, count: BigUint::from(1u8) });
    }
    let size = 1usize << poset.n;
    let ideal: Vec<bool> = (0..size).map(|s| poset.is_down_set(s as u32)).collect();
    // chains ending at each down-set; at most 6^20 < 2^128
    let mut f: Vec<u128> = ideal.iter().map(|&b| u128::from(b)).collect();
    for _ in 2..m {
        for bit in 0..poset.n {
            let b = 1usize << bit;
            for s in 0..size {
                if s & b != 0 {
                    f[s] += f[s ^ b];
                }
            }
        }
        for (v, &ok) in f.iter_mut().zip(&ideal) {
            if !ok {
                *v = 0;
            }
        }
    }
    let total: u128 = f.iter().sum();
    Ok(LabelingCount { m, count: BigUint::from(total) })
}

/// Mean binary labeling count over random point sets, next to the
/// theoretical lower and upper bounds on its expectation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelingBounds {
    pub n: usize,
    pub d: usize,
    pub trials: usize,
    pub mean_count: f64,
    pub lower: f64,
    pub upper: f64,
    pub within: bool,
}

/// `exp(ln2 (1 - 1/e) / (d-1)! * n^((d-1)/d))`.
pub fn labeling_lower_bound(n: usize, d: usize) -> f64 {
    let fact: f64 = (1..d).map(|k| k as f64).product();
    let e = (n as f64).powf((d as f64 - 1.0) / d as f64);
    (std::f64::consts::LN_2 * (1.0 - (-1.0f64).exp()) / fact * e).exp()
}

/// `exp((2^d + 2 ln2 - 1) * n^((d-1)/d))`.
pub fn labeling_upper_bound(n: usize, d: usize) -> f64 {
    let e = (n as f64).powf((d as f64 - 1.0) / d as f64);
    ((2f64.powi(d as i32) + 2.0 * std::f64::consts::LN_2 - 1.0) * e).exp()
}

pub fn empirical_labeling_bounds(n: usize, d: usize, trials: usize, seed: u64) -> Result<LabelingBounds> {
    if n == 0 || d == 0 || trials == 0 {
        return arg("n, d and trials must be positive");
    }
    if n > MAX_POSET {
        return Err(Error::SizeGuard(format!("posets are limited to {MAX_POSET} points, got {n}")));
    }
    let counts = par::map_indexed(trials, |t| -> Result<f64> {
        let mut rng = stream(seed, trial_stream(0, t as u32));
        let p = PointPoset::random(n, d, &mut rng)?;
        Ok(count_binary_labelings(&p).count.to_f64().expect("finite for n <= 30"))
    });
    let mut sum = 0.0;
    for c in counts {
        sum += c?;
    }
    let mean_count = sum / trials as f64;
    let (lower, upper) = (labeling_lower_bound(n, d), labeling_upper_bound(n, d));
    Ok(LabelingBounds { n, d, trials, mean_count, lower, upper, within: lower <= mean_count && mean_count <= upper })
}

/// `m^d - (m-1)^d`, the most border cells a monotone partition of the
/// `m^d` grid can have.
pub fn border_cell_bound(m: u64, d: u32) -> Result<u128> {
    if m == 0 || d < 2 {
        return arg("border cell bound needs m >= 1 and d >= 2");
    }
    let p = |b: u64| (b as u128).checked_pow(d).ok_or_else(|| Error::Argument("border cell bound overflows".into()));
    Ok(p(m)? - p(m - 1)?)
}

/// Number of partition cells of a 2-d staircase partition `heights`
/// (non-increasing, entries in `1..=m`) that touch, by a face or a corner,
/// a grid cell outside the partition.
pub fn border_cells_2d(heights: &[usize]) -> Result<usize> {
    let m = heights.len();
    if heights.iter().any(|&h| h == 0 || h > m) || heights.windows(2).any(|w| w[0] < w[1]) {
        return arg("heights must be non-increasing with entries in 1..=m");
    }
    let inside = |x: usize, y: usize| y <= heights[x - 1];
    let mut count = 0;
    for x in 1..=m {
        for y in 1..=heights[x - 1] {
            let touches = (-1i64..=1).any(|dx| {
                (-1i64..=1).any(|dy| {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    (dx, dy) != (0, 0)
                        && (1..=m as i64).contains(&nx)
                        && (1..=m as i64).contains(&ny)
                        && !inside(nx as usize, ny as usize)
                })
            });
            if touches {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// `C(N + d - 2, d - 1)`: cells of the `N^d` grid on the diagonal
/// `x_1 + ... + x_d = N + d - 1`, which are pairwise incomparable.
pub fn incomparable_cells_lower(big_n: usize, d: usize) -> Result<u128> {
    if big_n == 0 || d == 0 {
        return arg("incomparable cell count needs N >= 1 and d >= 1");
    }
    Ok(binomial(big_n + d - 2, d - 1))
}

/// The diagonal cells themselves (1-based coordinates).
pub fn diagonal_cells(big_n: usize, d: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, parts: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 0 {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for v in 1..=max.min(left) {
            cur.push(v);
            rec(left - v, parts - 1, max, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if big_n > 0 && d > 0 {
        rec(big_n + d - 1, d, big_n, &mut Vec::new(), &mut out);
    }
    out
}
