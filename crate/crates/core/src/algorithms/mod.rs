//! Sparse isotonic estimators: exhaustive subset search (IPIR), LP-based
//! support recovery (LPSR and its sequential variant), the two-stage fit
//! (TSIR), and the interpolation rules that turn fitted values into a
//! callable function.

mod fit;
mod ipir;
mod lpsr;
pub mod subsets;

pub use fit::{predict, Rule, SparseFit};
pub use ipir::{ipir_fit, ipir_fit_with, ipir_search, IpirOptions, IpirOutcome, MAX_SUBSETS};
pub use lpsr::{lpsr, lpsr_detailed, lpsr_full_problem, lpsr_objective, slpsr, LpsrOutcome};

use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};
use crate::exact::solve_fixed;
use crate::model::{ActiveSet, Dataset};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecoveryMethod {
    /// The active set chosen by the exhaustive search.
    Ipir,
    Lpsr,
    Slpsr,
}

impl RecoveryMethod {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ipir" => Ok(Self::Ipir),
            "lpsr" => Ok(Self::Lpsr),
            "slpsr" | "s-lpsr" => Ok(Self::Slpsr),
            other => arg(format!("unknown recovery method `{other}` (expected ipir, lpsr or slpsr)")),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Ipir => "IPIR",
            Self::Lpsr => "LPSR",
            Self::Slpsr => "S-LPSR",
        }
    }
}

/// How the active set is recovered, plus coordinates that must not be
/// selected together (`j` is the negation of `i`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveryConfig {
    pub method: RecoveryMethod,
    /// 0-based coordinate pairs; the relation is symmetric.
    pub exclusions: Vec<(usize, usize)>,
    /// Sequential recovery only: split the samples into `s` contiguous folds
    /// and use a fresh fold in each round instead of reusing all data.
    pub fresh_folds: bool,
}

impl RecoveryConfig {
    pub fn new(method: RecoveryMethod) -> Self {
        Self { method, exclusions: Vec::new(), fresh_folds: false }
    }

    pub fn with_exclusions(mut self, pairs: Vec<(usize, usize)>) -> Self {
        self.exclusions = pairs;
        self
    }

    pub fn with_fresh_folds(mut self, on: bool) -> Self {
        self.fresh_folds = on;
        self
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        validate_exclusions(&self.exclusions, d)
    }

    /// Coordinates excluded by selecting `k`.
    pub fn partners(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        partners(&self.exclusions, k)
    }
}

pub(crate) fn validate_exclusions(pairs: &[(usize, usize)], d: usize) -> Result<()> {
    for &(i, j) in pairs {
        if i >= d || j >= d {
            return arg(format!("exclusion pair ({}, {}) out of range for d = {d}", i + 1, j + 1));
        }
        if i == j {
            return arg(format!("exclusion pair ({}, {}) repeats a coordinate", i + 1, j + 1));
        }
    }
    Ok(())
}

pub(crate) fn partners(pairs: &[(usize, usize)], k: usize) -> impl Iterator<Item = usize> + '_ {
    pairs.iter().filter_map(move |&(i, j)| {
        if i == k {
            Some(j)
        } else if j == k {
            Some(i)
        } else {
            None
        }
    })
}

pub(crate) fn check_sparsity(s: usize, d: usize) -> Result<()> {
    if s == 0 || s > d {
        return arg(format!("sparsity must satisfy 1 <= s <= d = {d}, got {s}"));
    }
    Ok(())
}

/// Stage one on its own: estimate the active set.
pub fn recover_support(ds: &Dataset, s: usize, config: &RecoveryConfig) -> Result<ActiveSet> {
    config.validate(ds.d())?;
    match config.method {
        RecoveryMethod::Ipir => {
            let options = IpirOptions { exclusions: config.exclusions.clone(), ..IpirOptions::default() };
            Ok(ipir_search(ds, s, &options)?.fit.active)
        }
        RecoveryMethod::Lpsr => {
            if !config.exclusions.is_empty() {
                return arg("LPSR cannot honor exclusion pairs; use S-LPSR or IPIR");
            }
            lpsr(ds, s)
        }
        RecoveryMethod::Slpsr => slpsr(ds, s, config),
    }
}

/// Two-stage fit: recover the active set, then solve the fixed-set problem
/// exactly on it.
pub fn tsir_fit(ds: &Dataset, s: usize, recovery: &RecoveryConfig, rule: Rule) -> Result<SparseFit> {
    let active = recover_support(ds, s, recovery)?;
    let fit = solve_fixed(ds, &active)?;
    Ok(SparseFit::new(ds, fit, rule))
}
