use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bai::Procedure;
use crate::error::{Error, Result};
use crate::gaps::PriorMeans;
use crate::instance::{
    validate_instance_with, Consistency, Instance, InstanceSpec, RewardDistribution,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Bai,
    Regret,
    Bounds,
    Validate,
}

/// Description of a batch of experiments, read from JSON.
///
/// ```json
/// { "mode": "bai", "instance": "table2.json", "trials": 100,
///   "master_seed": 1, "deltas": [0.05, 0.1], "procedures": ["a", "b"] }
/// ```
///
/// A relative `instance` path is resolved against the plan file's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub mode: Mode,
    pub instance: PathBuf,
    #[serde(default = "one")]
    pub trials: u64,
    #[serde(default)]
    pub master_seed: u64,
    /// Confidence grid (bai and bounds modes).
    #[serde(default)]
    pub deltas: Vec<f64>,
    /// Budget grid (regret mode, optionally bounds).
    #[serde(default)]
    pub budgets: Vec<f64>,
    /// Procedures to run; empty means all three.
    #[serde(default)]
    pub procedures: Vec<Procedure>,
    #[serde(default)]
    pub mu1_tilde: Option<f64>,
    #[serde(default)]
    pub mu2_tilde: Option<f64>,
    /// Exploration accuracy; the default depends on the budget.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Confidence factor `L`; defaults to `4KM`.
    #[serde(default)]
    pub confidence_factor: Option<f64>,
    #[serde(default)]
    pub max_pulls: Option<u64>,
    /// Overrides the instance file's reward distribution.
    #[serde(default)]
    pub distribution: Option<RewardDistribution>,
    /// Downgrade consistency violations of the instance to warnings.
    #[serde(default)]
    pub lenient: bool,
}

fn one() -> u64 {
    1
}

impl ExperimentPlan {
    pub fn new(mode: Mode, instance: impl Into<PathBuf>) -> Self {
        Self {
            mode,
            instance: instance.into(),
            trials: 1,
            master_seed: 0,
            deltas: Vec::new(),
            budgets: Vec::new(),
            procedures: Vec::new(),
            mu1_tilde: None,
            mu2_tilde: None,
            epsilon: None,
            confidence_factor: None,
            max_pulls: None,
            distribution: None,
            lenient: false,
        }
    }

    pub fn from_json_str(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Reads and validates a plan file, resolving its instance path.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut plan = Self::from_json_str(&text).map_err(|source| Error::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        if plan.instance.is_relative() {
            if let Some(dir) = path.parent() {
                plan.instance = dir.join(&plan.instance);
            }
        }
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Parameter("trials must be at least 1".into()));
        }
        let check_grid = |name: &str, grid: &[f64]| -> Result<()> {
            if grid.is_empty() {
                return Err(Error::Parameter(format!(
                    "{} mode needs a non-empty {name} grid",
                    self.mode_name()
                )));
            }
            if let Some(bad) = grid.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
                return Err(Error::Parameter(format!(
                    "{name} grid value {bad} is not positive"
                )));
            }
            Ok(())
        };
        match self.mode {
            Mode::Bai | Mode::Bounds => {
                check_grid("delta", &self.deltas)?;
                if let Some(bad) = self.deltas.iter().find(|d| **d >= 1.0) {
                    return Err(Error::Parameter(format!("delta {bad} must be below 1")));
                }
            }
            Mode::Regret => check_grid("budget", &self.budgets)?,
            Mode::Validate => {}
        }
        if !self.budgets.is_empty() {
            check_grid("budget", &self.budgets)?;
        }
        if self.mu1_tilde.is_some() != self.mu2_tilde.is_some() {
            return Err(Error::Parameter(
                "mu1_tilde and mu2_tilde must be given together".into(),
            ));
        }
        self.prior()?;
        Ok(())
    }

    fn mode_name(&self) -> &'static str {
        match self.mode {
            Mode::Bai => "bai",
            Mode::Regret => "regret",
            Mode::Bounds => "bounds",
            Mode::Validate => "validate",
        }
    }

    /// The prior proxies, defaulting to `(0.95, 0.75)`.
    pub fn prior(&self) -> Result<PriorMeans> {
        match (self.mu1_tilde, self.mu2_tilde) {
            (Some(a), Some(b)) => PriorMeans::new(a, b),
            _ => Ok(PriorMeans::DEFAULT),
        }
    }

    pub fn procedures(&self) -> Vec<Procedure> {
        if self.procedures.is_empty() {
            Procedure::ALL.to_vec()
        } else {
            self.procedures.clone()
        }
    }

    pub fn consistency(&self) -> Consistency {
        if self.lenient {
            Consistency::Warn
        } else {
            Consistency::Enforce
        }
    }

    /// Loads and validates the instance named by the plan.
    pub fn load_instance(&self) -> Result<Instance> {
        let mut spec = InstanceSpec::load(&self.instance)?;
        if let Some(d) = self.distribution {
            spec = spec.with_distribution(d);
        }
        validate_instance_with(&spec, self.consistency())
    }
}
