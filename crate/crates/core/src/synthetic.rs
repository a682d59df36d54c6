//! Synthetic instances built from anchor points: `f(x) = 1` when some anchor
//! lies below `x` on the active coordinates, else 0.

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};
use crate::model::{dominates_on, ActiveSet, Dataset, NoiseModel};
use crate::rng::{seeded, Rng};

/// Anchor count used when none is given.
pub const DEFAULT_ANCHORS: usize = 10;

/// A sparse monotone indicator defined by anchor points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnchorModel {
    d: usize,
    anchors: Vec<f64>,
    active: ActiveSet,
    noise_sigma: f64,
    noise_model: NoiseModel,
}

impl AnchorModel {
    pub fn new(anchors: Vec<Vec<f64>>, active: ActiveSet, noise_sigma: f64, noise_model: NoiseModel) -> Result<Self> {
        let d = anchors.first().map_or(0, Vec::len);
        if anchors.is_empty() || d == 0 || anchors.iter().any(|a| a.len() != d) {
            return arg("anchor model needs at least one anchor of a common positive dimension");
        }
        if anchors.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
            return arg("anchors must lie in the unit cube");
        }
        if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
            return arg(format!("noise standard deviation must be finite and >= 0, got {noise_sigma}"));
        }
        active.check_dim(d)?;
        Ok(Self { d, anchors: anchors.into_iter().flatten().collect(), active, noise_sigma, noise_model })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn r(&self) -> usize {
        self.anchors.len() / self.d
    }

    pub fn anchor(&self, j: usize) -> &[f64] {
        &self.anchors[j * self.d..(j + 1) * self.d]
    }

    pub fn active(&self) -> &ActiveSet {
        &self.active
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn noise_model(&self) -> NoiseModel {
        self.noise_model
    }

    /// The noiseless function value, 0 or 1.
    pub fn value(&self, x: &[f64]) -> f64 {
        let a = self.active.indices();
        let hit = (0..self.r()).any(|j| dominates_on(self.anchor(j), x, a));
        if hit {
            1.0
        } else {
            0.0
        }
    }

    /// Draw one `(X, Y)` pair from the model, `X` uniform on the cube.
    pub fn sample(&self, rng: &mut Rng, x: &mut [f64]) -> f64 {
        x.iter_mut().for_each(|v| *v = rng.random());
        self.label(rng, x)
    }

    /// A noisy label for the point `x`.
    pub fn label(&self, rng: &mut Rng, x: &[f64]) -> f64 {
        let normal = Normal::new(0.0, self.noise_sigma).expect("validated sigma");
        match self.noise_model {
            NoiseModel::NoisyOutput => self.value(x) + normal.sample(rng),
            NoiseModel::NoisyInput => {
                let shifted: Vec<f64> = x.iter().map(|v| v + normal.sample(rng)).collect();
                self.value(&shifted)
            }
        }
    }
}

/// Shape of a synthetic instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceParams {
    pub n: usize,
    pub d: usize,
    pub s: usize,
    pub r: usize,
    pub sigma: f64,
}

impl InstanceParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 || self.s == 0 || self.r == 0 {
            return arg("n, d, s and r must all be positive");
        }
        if self.s > self.d {
            return arg(format!("s = {} exceeds d = {}", self.s, self.d));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return arg(format!("noise standard deviation must be finite and >= 0, got {}", self.sigma));
        }
        Ok(())
    }
}

/// Draw anchors, then the sample points, then the noise, in that order.
pub fn anchor_instance(rng: &mut Rng, p: &InstanceParams, noise_model: NoiseModel) -> Result<(Dataset, AnchorModel)> {
    p.validate()?;
    let anchors: Vec<Vec<f64>> = (0..p.r).map(|_| (0..p.d).map(|_| rng.random()).collect()).collect();
    let model = AnchorModel::new(anchors, ActiveSet::new((0..p.s).collect(), p.d)?, p.sigma, noise_model)?;
    let rows: Vec<Vec<f64>> = (0..p.n).map(|_| (0..p.d).map(|_| rng.random()).collect()).collect();
    let labels: Vec<f64> = rows.iter().map(|x| model.label(rng, x)).collect();
    let ds = match noise_model {
        NoiseModel::NoisyOutput => Dataset::new_unbounded(rows, labels, noise_model)?,
        NoiseModel::NoisyInput => Dataset::new(rows, labels, noise_model)?,
    };
    Ok((ds.with_sparsity_hint(p.s), model))
}

/// `Y = f(X) + W` with Gaussian `W`; labels are left unclipped.
pub fn gen_anchor_instance(
    n: usize,
    d: usize,
    s: usize,
    r: usize,
    sigma: f64,
    seed: u64,
) -> Result<(Dataset, AnchorModel)> {
    anchor_instance(&mut seeded(seed), &InstanceParams { n, d, s, r, sigma }, NoiseModel::NoisyOutput)
}

/// `Y = f(X + W)` with independent Gaussian noise on every coordinate.
pub fn gen_noisy_input_instance(
    n: usize,
    d: usize,
    s: usize,
    r: usize,
    sigma: f64,
    seed: u64,
) -> Result<(Dataset, AnchorModel)> {
    anchor_instance(&mut seeded(seed), &InstanceParams { n, d, s, r, sigma }, NoiseModel::NoisyInput)
}
