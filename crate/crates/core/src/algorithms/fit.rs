use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::exact::FitResult;
use crate::model::{dominates_on, ActiveSet, Dataset};

/// How a fitted function is extended from the training points to all of
/// feature space.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    /// Smallest monotone value: max of fitted values at training points below `x`, else 0.
    #[default]
    Min,
    /// Largest monotone value: min of fitted values at training points above `x`, else 1.
    Max,
}

impl Rule {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "min" => Ok(Self::Min),
            "max" => Ok(Self::Max),
            other => arg(format!("unknown rule `{other}` (expected min or max)")),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Min => "min",
            Rule::Max => "max",
        })
    }
}

/// A fitted sparse monotone function.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseFit {
    fit: FitResult,
    rule: Rule,
    d: usize,
    features: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SparseFitJson {
    active_indices: Vec<usize>,
    fitted_values: Vec<f64>,
    rule: Rule,
    objective: f64,
    features: Vec<Vec<f64>>,
}

impl SparseFit {
    pub fn new(ds: &Dataset, fit: FitResult, rule: Rule) -> Self {
        Self { fit, rule, d: ds.d(), features: ds.features().to_vec() }
    }

    pub fn fit(&self) -> &FitResult {
        &self.fit
    }

    pub fn active(&self) -> &ActiveSet {
        &self.fit.active
    }

    pub fn fitted(&self) -> &[f64] {
        &self.fit.fitted
    }

    pub fn objective(&self) -> f64 {
        self.fit.objective
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    pub fn with_rule(mut self, rule: Rule) -> Self {
        self.rule = rule;
        self
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.fit.fitted.len()
    }

    fn x(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.d {
            return arg(format!("point has {} coordinates, fit expects {}", x.len(), self.d));
        }
        let a = self.fit.active.indices();
        let f = &self.fit.fitted;
        Ok(match self.rule {
            Rule::Min => (0..self.n()).filter(|&i| dominates_on(self.x(i), x, a)).map(|i| f[i]).fold(0.0, f64::max),
            Rule::Max => (0..self.n()).filter(|&i| dominates_on(x, self.x(i), a)).map(|i| f[i]).fold(1.0, f64::min),
        })
    }

    pub fn predict_dataset(&self, ds: &Dataset) -> Result<Vec<f64>> {
        (0..ds.n()).map(|i| self.predict(ds.x(i))).collect()
    }

    pub fn to_json<W: Write>(&self, w: W) -> Result<()> {
        let json = SparseFitJson {
            active_indices: self.fit.active.one_based(),
            fitted_values: self.fit.fitted.clone(),
            rule: self.rule,
            objective: self.fit.objective,
            features: (0..self.n()).map(|i| self.x(i).to_vec()).collect(),
        };
        serde_json::to_writer_pretty(w, &json)?;
        Ok(())
    }

    /// Load a fit and check that it is well formed and monotone.
    pub fn from_json<R: Read>(r: R) -> Result<Self> {
        let json: SparseFitJson = serde_json::from_reader(r)?;
        let n = json.fitted_values.len();
        if json.features.len() != n {
            return arg(format!("fit has {} fitted values but {} feature rows", n, json.features.len()));
        }
        let d = json.features.first().map_or(0, Vec::len);
        if n == 0 || d == 0 || json.features.iter().any(|r| r.len() != d) {
            return arg("fit features must be a non-empty rectangular matrix");
        }
        if json.features.iter().flatten().chain(&json.fitted_values).any(|v| !v.is_finite()) {
            return arg("fit contains non-finite numbers");
        }
        let active = ActiveSet::from_one_based(&json.active_indices, d)?;
        let features: Vec<f64> = json.features.into_iter().flatten().collect();
        let fit = Self {
            fit: FitResult { fitted: json.fitted_values, objective: json.objective, active },
            rule: json.rule,
            d,
            features,
        };
        fit.check_monotone()?;
        Ok(fit)
    }

    fn check_monotone(&self) -> Result<()> {
        let a = self.fit.active.indices();
        for i in 0..self.n() {
            for j in 0..self.n() {
                if self.fit.fitted[i] > self.fit.fitted[j] && dominates_on(self.x(i), self.x(j), a) {
                    return Err(Error::Contract(format!(
                        "fitted values are not monotone: sample {} is below sample {} but has a larger value",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn predict(fit: &SparseFit, x: &[f64]) -> Result<f64> {
    fit.predict(x)
}
