//! Monte-Carlo estimates over the uniform distribution on the unit cube.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::algorithms::SparseFit;
use crate::error::{arg, Error, Result};
use crate::model::NoiseModel;
use crate::rng::seeded;
use crate::synthetic::AnchorModel;

/// A point estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    fn from_samples(sum: f64, sum_sq: f64, count: usize) -> Self {
        let m = count as f64;
        let mean = sum / m;
        let var = if count > 1 { ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0) } else { 0.0 };
        Self { value: mean, std_error: (var / m).sqrt() }
    }

    /// Whether `target` lies within `k` standard errors (plus `slack`).
    pub fn within(&self, target: f64, k: f64, slack: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error + slack
    }
}

/// A function on the unit cube that can be compared with others.
pub trait CubeFunction {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> f64;
    /// Whether every value the function takes is 0 or 1.
    fn is_binary(&self) -> bool;
}

impl CubeFunction for SparseFit {
    fn dim(&self) -> usize {
        self.d()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.predict(x).expect("dimension checked by caller")
    }

    fn is_binary(&self) -> bool {
        self.fitted().iter().all(|&v| v == 0.0 || v == 1.0)
    }
}

impl CubeFunction for AnchorModel {
    fn dim(&self) -> usize {
        self.d()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.value(x)
    }

    fn is_binary(&self) -> bool {
        true
    }
}

fn check_pair(a: &dyn CubeFunction, b: &dyn CubeFunction, n_mc: usize) -> Result<()> {
    if n_mc == 0 {
        return arg("Monte-Carlo sample count must be positive");
    }
    if a.dim() != b.dim() {
        return arg(format!("functions live in different dimensions ({} vs {})", a.dim(), b.dim()));
    }
    Ok(())
}

/// `(integral of (fit - truth)^2)^(1/2)`; the standard error comes from the
/// delta method on the mean squared difference.
pub fn l2_error_mc(fit: &dyn CubeFunction, truth: &dyn CubeFunction, n_mc: usize, seed: u64) -> Result<Estimate> {
    check_pair(fit, truth, n_mc)?;
    let mut rng = seeded(seed);
    let mut x = vec![0.0; fit.dim()];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n_mc {
        x.iter_mut().for_each(|v| *v = rng.random());
        let e = (fit.eval(&x) - truth.eval(&x)).powi(2);
        sum += e;
        sum_sq += e * e;
    }
    let ms = Estimate::from_samples(sum, sum_sq, n_mc);
    let value = ms.value.sqrt();
    let std_error = if value > 0.0 { ms.std_error / (2.0 * value) } else { 0.0 };
    Ok(Estimate { value, std_error })
}

/// Probability mass on which two binary partitions disagree.
pub fn discrepancy_mc(a: &dyn CubeFunction, b: &dyn CubeFunction, n_mc: usize, seed: u64) -> Result<Estimate> {
    check_pair(a, b, n_mc)?;
    if !a.is_binary() || !b.is_binary() {
        return Err(Error::Contract("discrepancy needs binary-valued functions".into()));
    }
    let mut rng = seeded(seed);
    let mut x = vec![0.0; a.dim()];
    let mut hits = 0usize;
    for _ in 0..n_mc {
        x.iter_mut().for_each(|v| *v = rng.random());
        if a.eval(&x) != b.eval(&x) {
            hits += 1;
        }
    }
    Ok(Estimate::from_samples(hits as f64, hits as f64, n_mc))
}

/// Probability that the fit's label at a fresh model sample differs from
/// the sample's noisy label.
pub fn misclassification_q_mc(fit: &dyn CubeFunction, model: &AnchorModel, n_mc: usize, seed: u64) -> Result<Estimate> {
    check_pair(fit, model, n_mc)?;
    if model.noise_model() != NoiseModel::NoisyInput {
        return Err(Error::Contract("misclassification is defined for the noisy-input model".into()));
    }
    let mut rng = seeded(seed);
    let mut x = vec![0.0; model.d()];
    let mut hits = 0usize;
    for _ in 0..n_mc {
        let y = model.sample(&mut rng, &mut x);
        if fit.eval(&x) != y {
            hits += 1;
        }
    }
    Ok(Estimate::from_samples(hits as f64, hits as f64, n_mc))
}

/// `P(Y_1 > Y_2 | X_1k > X_2k) - P(Y_1 < Y_2 | X_1k > X_2k)` for two
/// independent model samples, conditioned by rejection. With binary labels
/// this is the `Y_1 = 1, Y_2 = 0` form of the gap.
pub fn estimate_gap_pk(model: &AnchorModel, k: usize, n_pairs: usize, seed: u64) -> Result<Estimate> {
    if k >= model.d() {
        return arg(format!("coordinate {} out of range (d = {})", k + 1, model.d()));
    }
    if n_pairs == 0 {
        return arg("pair count must be positive");
    }
    let mut rng = seeded(seed);
    let (mut x1, mut x2) = (vec![0.0; model.d()], vec![0.0; model.d()]);
    let (mut sum, mut sum_sq, mut accepted) = (0.0, 0.0, 0usize);
    while accepted < n_pairs {
        let y1 = model.sample(&mut rng, &mut x1);
        let y2 = model.sample(&mut rng, &mut x2);
        if x1[k] <= x2[k] {
            continue;
        }
        accepted += 1;
        let term: f64 = if y1 > y2 {
            1.0
        } else if y1 < y2 {
            -1.0
        } else {
            0.0
        };
        sum += term;
        sum_sq += term * term;
    }
    Ok(Estimate::from_samples(sum, sum_sq, n_pairs))
}
