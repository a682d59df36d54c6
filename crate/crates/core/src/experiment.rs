//! Support-recovery experiments: a grid of `(n, d)` cells, several recovery
//! methods, and seeded independent trials per cell.

use std::io::Write;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::algorithms::{recover_support, RecoveryConfig, RecoveryMethod};
use crate::error::{arg, Error, Result};
use crate::model::{ActiveSet, NoiseModel};
use crate::par;
use crate::rng::{stream, trial_stream};
use crate::synthetic::{anchor_instance, InstanceParams, DEFAULT_ANCHORS};

/// Default cap on recovery calls per experiment.
pub const DEFAULT_MAX_SOLVER_CALLS: u64 = 1_000_000;

/// Experiment description, usually read from a TOML file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub ns: Vec<usize>,
    pub ds: Vec<usize>,
    pub s: usize,
    #[serde(default = "default_anchors")]
    pub r: usize,
    /// Noise standard deviation; give this or `noise_variance`, not both.
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub noise_variance: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub methods: Vec<RecoveryMethod>,
    #[serde(default = "default_model")]
    pub model: NoiseModel,
    #[serde(default)]
    pub max_solver_calls: Option<u64>,
    /// Present the coordinates to the recovery methods in a random order
    /// (drawn per trial) instead of with the active ones first. Lowest-index
    /// tie-breaking otherwise favors the true support whenever a method ties.
    #[serde(default)]
    pub shuffle_coordinates: bool,
}

fn default_anchors() -> usize {
    DEFAULT_ANCHORS
}

fn default_model() -> NoiseModel {
    NoiseModel::NoisyOutput
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(0, |sp| text[..sp.start.min(text.len())].matches('\n').count() + 1);
            Error::Parse { line, message: e.message().to_string() }
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn sigma(&self) -> Result<f64> {
        match (self.sigma, self.noise_variance) {
            (Some(_), Some(_)) => arg("give either sigma or noise_variance, not both"),
            (Some(s), None) => Ok(s),
            (None, Some(v)) if v >= 0.0 => Ok(v.sqrt()),
            (None, Some(v)) => arg(format!("noise_variance must be >= 0, got {v}")),
            (None, None) => arg("the noise level (sigma or noise_variance) is required"),
        }
    }

    pub fn solver_calls(&self) -> u64 {
        (self.ns.len() * self.ds.len() * self.trials * self.methods.len()) as u64
    }

    pub fn validate(&self) -> Result<()> {
        if self.ns.is_empty() || self.ds.is_empty() || self.methods.is_empty() {
            return arg("ns, ds and methods must be non-empty");
        }
        if self.trials == 0 {
            return arg("trials must be positive");
        }
        let sigma = self.sigma()?;
        for &n in &self.ns {
            for &d in &self.ds {
                InstanceParams { n, d, s: self.s, r: self.r, sigma }.validate()?;
            }
        }
        let cap = self.max_solver_calls.unwrap_or(DEFAULT_MAX_SOLVER_CALLS);
        if self.solver_calls() > cap {
            return Err(Error::SizeGuard(format!(
                "experiment needs {} recovery calls, above the budget of {cap}",
                self.solver_calls()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub n: usize,
    pub d: usize,
    pub method: RecoveryMethod,
    pub successes: usize,
    pub trials: usize,
    pub percent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialDetail {
    pub n: usize,
    pub d: usize,
    pub trial: usize,
    pub method: RecoveryMethod,
    /// 1-based recovered coordinates.
    pub recovered: Vec<usize>,
    pub success: bool,
}

/// Success percentages for every `(n, d, method)` plus per-trial detail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryTable {
    pub config: ExperimentConfig,
    pub cells: Vec<CellResult>,
    pub details: Vec<TrialDetail>,
}

impl RecoveryTable {
    pub fn percent(&self, n: usize, d: usize, method: RecoveryMethod) -> Option<f64> {
        self.cells.iter().find(|c| c.n == n && c.d == d && c.method == method).map(|c| c.percent)
    }

    /// One row per `n`, one column per method and `d`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["n".to_string()];
        for m in &self.config.methods {
            for d in &self.config.ds {
                header.push(format!("{} d={d}", m.label()));
            }
        }
        out.write_record(&header).map_err(csv_err)?;
        for &n in &self.config.ns {
            let mut row = vec![n.to_string()];
            for &m in &self.config.methods {
                for &d in &self.config.ds {
                    row.push(format_percent(self.percent(n, d, m).unwrap_or(f64::NAN)));
                }
            }
            out.write_record(&row).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn format_percent(p: f64) -> String {
    if p.fract() == 0.0 {
        format!("{p:.0}")
    } else {
        format!("{p:.2}")
    }
}

/// Run every trial of every cell. Trial `t` of cell `c` draws from its own
/// random stream, so results do not depend on scheduling or thread count.
/// All methods see the same instance within a trial.
pub fn recovery_experiment(config: &ExperimentConfig) -> Result<RecoveryTable> {
    config.validate()?;
    let sigma = config.sigma()?;
    let mut jobs = Vec::new();
    for &n in &config.ns {
        for &d in &config.ds {
            let cell = jobs.len() / config.trials;
            for t in 0..config.trials {
                jobs.push((cell, n, d, t));
            }
        }
    }
    let outcomes = par::map_slice(&jobs, |&(cell, n, d, t)| -> Result<Vec<TrialDetail>> {
        let mut rng = stream(config.seed, trial_stream(cell as u32, t as u32));
        let params = InstanceParams { n, d, s: config.s, r: config.r, sigma };
        let (ds, model) = anchor_instance(&mut rng, &params, config.model)?;
        let mut order: Vec<usize> = (0..d).collect();
        if config.shuffle_coordinates {
            order.shuffle(&mut rng);
        }
        let shown = if config.shuffle_coordinates { ds.columns(&order)? } else { ds };
        config
            .methods
            .iter()
            .map(|&method| {
                let picked = recover_support(&shown, config.s, &RecoveryConfig::new(method))?;
                let found = ActiveSet::new(picked.indices().iter().map(|&j| order[j]).collect(), d)?;
                Ok(TrialDetail {
                    n,
                    d,
                    trial: t,
                    method,
                    recovered: found.one_based(),
                    success: found == *model.active(),
                })
            })
            .collect()
    });
    let mut details = Vec::with_capacity(jobs.len() * config.methods.len());
    for o in outcomes {
        details.extend(o?);
    }
    let mut cells = Vec::new();
    for &n in &config.ns {
        for &d in &config.ds {
            for &method in &config.methods {
                let successes =
                    details.iter().filter(|t| t.n == n && t.d == d && t.method == method && t.success).count();
                cells.push(CellResult {
                    n,
                    d,
                    method,
                    successes,
                    trials: config.trials,
                    percent: 100.0 * successes as f64 / config.trials as f64,
                });
            }
        }
    }
    Ok(RecoveryTable { config: config.clone(), cells, details })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
ns = [40]
ds = [4]
s = 2
noise_variance = 0.0
trials = 3
seed = 5
methods = ["ipir", "lpsr", "slpsr"]
"#;

    #[test]
    fn parses_and_runs_a_small_grid() {
        let config = ExperimentConfig::from_toml_str(SMALL).unwrap();
        assert_eq!(config.r, DEFAULT_ANCHORS);
        let table = recovery_experiment(&config).unwrap();
        assert_eq!(table.cells.len(), 3);
        assert_eq!(table.details.len(), 9);
        assert!(table.cells.iter().all(|c| (0.0..=100.0).contains(&c.percent)));
        assert_eq!(table, recovery_experiment(&config).unwrap());
        let mut csv = Vec::new();
        table.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("n,IPIR d=4,LPSR d=4,S-LPSR d=4\n40,"));
    }

    #[test]
    fn reports_parse_errors_with_lines() {
        let err = ExperimentConfig::from_toml_str("ns = [10]\nds = [3]\ns = \"x\"\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = ExperimentConfig::from_toml_str(&SMALL.replace("seed = 5", "seed = 5\nbogus = 1")).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        let err = ExperimentConfig::from_toml_str(&SMALL.replace("noise_variance = 0.0", "")).unwrap_err();
        assert!(matches!(err, Error::Argument(_)));
    }

    #[test]
    fn budget_guard_refuses_oversized_runs() {
        let text = SMALL.replace("trials = 3", "trials = 3\nmax_solver_calls = 5");
        assert!(matches!(ExperimentConfig::from_toml_str(&text), Err(Error::SizeGuard(_))));
    }
}
