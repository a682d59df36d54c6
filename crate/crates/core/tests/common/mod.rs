#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparse_isotonic::model::{Dataset, NoiseModel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Features on a small integer grid so ties and comparabilities are common.
pub fn grid_dataset(rng: &mut ChaCha8Rng, n: usize, d: usize, grid: u32, model: NoiseModel) -> Dataset {
    let rows = (0..n).map(|_| (0..d).map(|_| f64::from(rng.random_range(0..grid))).collect()).collect();
    let labels = (0..n)
        .map(|_| match model {
            NoiseModel::NoisyInput => f64::from(rng.random_range(0..2u8)),
            NoiseModel::NoisyOutput => rng.random_range(0.0..1.0),
        })
        .collect();
    Dataset::new(rows, labels, model).unwrap()
}

/// Projection onto `{F : F_i <= F_j for every (i, j) in pairs, 0 <= F <= 1}`
/// by Dykstra's alternating projections, one constraint set per pair plus
/// the box.
pub fn dykstra_isotonic(labels: &[f64], pairs: &[(usize, usize)], iters: usize) -> Vec<f64> {
    let n = labels.len();
    let mut x = labels.to_vec();
    let mut inc = vec![[0.0f64; 2]; pairs.len()];
    let mut box_inc = vec![0.0; n];
    for _ in 0..iters {
        for (e, &(i, j)) in pairs.iter().enumerate() {
            let (yi, yj) = (x[i] + inc[e][0], x[j] + inc[e][1]);
            let (pi, pj) = if yi > yj { ((yi + yj) / 2.0, (yi + yj) / 2.0) } else { (yi, yj) };
            inc[e] = [yi - pi, yj - pj];
            x[i] = pi;
            x[j] = pj;
        }
        for i in 0..n {
            let y = x[i] + box_inc[i];
            let p = y.clamp(0.0, 1.0);
            box_inc[i] = y - p;
            x[i] = p;
        }
    }
    x
}
