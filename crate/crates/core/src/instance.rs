//! Problem instances: arms, fidelity ladder, and per-(arm, fidelity) means.
//!
//! An [`InstanceSpec`] is the raw, user-supplied description (usually read
//! from JSON). [`validate_instance`] checks it against the model constraints
//! and produces an [`Instance`], the canonical form every algorithm consumes:
//! arms are relabeled so that top-fidelity means are strictly decreasing from
//! the first arm, which is therefore the unique best arm.
//!
//! All indices inside the library are 0-based. Human-facing text (error
//! messages, CSV output) uses 1-based labels.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack applied to the consistency check `|mu(m) - mu(M)| <= zeta(m)`
/// so that decimal table values sitting exactly on the boundary are accepted.
pub const CONSISTENCY_SLACK: f64 = 1e-9;

/// Observation model of an arm pulled at a given fidelity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardDistribution {
    #[default]
    Bernoulli,
    /// Every pull returns the mean exactly. Used for oracle tests.
    Deterministic,
}

/// Raw multi-fidelity bandit instance, `means[arm][fidelity]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    #[serde(rename = "arms")]
    pub num_arms: usize,
    #[serde(rename = "fidelities")]
    pub num_fidelities: usize,
    pub costs: Vec<f64>,
    pub error_bounds: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    #[serde(default)]
    pub distribution: RewardDistribution,
}

impl InstanceSpec {
    pub fn from_json_str(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Reads an instance file. Shape and value errors are reported here;
    /// model constraints are left to [`validate_instance`].
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let spec = Self::from_json_str(&text).map_err(|source| Error::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        spec.check_shape()?;
        let bad = spec.value_violations();
        if !bad.is_empty() {
            return Err(Error::Invalid(bad));
        }
        Ok(spec)
    }

    pub fn with_distribution(mut self, distribution: RewardDistribution) -> Self {
        self.distribution = distribution;
        self
    }

    fn check_shape(&self) -> Result<()> {
        let (k, m) = (self.num_arms, self.num_fidelities);
        if k == 0 || m == 0 {
            return Err(Error::Structural(format!(
                "need at least one arm and one fidelity, got K={k}, M={m}"
            )));
        }
        if self.costs.len() != m {
            return Err(Error::Structural(format!(
                "costs has {} entries, expected M={m}",
                self.costs.len()
            )));
        }
        if self.error_bounds.len() != m {
            return Err(Error::Structural(format!(
                "error_bounds has {} entries, expected M={m}",
                self.error_bounds.len()
            )));
        }
        if self.means.len() != k {
            return Err(Error::Structural(format!(
                "means has {} rows, expected K={k}",
                self.means.len()
            )));
        }
        if let Some((arm, row)) = self.means.iter().enumerate().find(|(_, r)| r.len() != m) {
            return Err(Error::Structural(format!(
                "means row for arm {} has {} entries, expected M={m}",
                arm + 1,
                row.len()
            )));
        }
        Ok(())
    }

    fn value_violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (fidelity, &value) in self.costs.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                out.push(Violation::NonPositiveCost { fidelity, value });
            }
        }
        for (fidelity, &value) in self.error_bounds.iter().enumerate() {
            if !(value.is_finite() && value >= 0.0) {
                out.push(Violation::NegativeErrorBound { fidelity, value });
            }
        }
        for (arm, row) in self.means.iter().enumerate() {
            for (fidelity, &value) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&value) {
                    out.push(Violation::MeanOutOfRange {
                        arm,
                        fidelity,
                        value,
                    });
                }
            }
        }
        out
    }
}

/// A broken model constraint. Arm and fidelity fields are 0-based and refer
/// to the labeling of the spec that was validated.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    TooFewArms {
        arms: usize,
    },
    TiedOptimum {
        first: usize,
        second: usize,
        mean: f64,
    },
    NonPositiveCost {
        fidelity: usize,
        value: f64,
    },
    DecreasingCost {
        fidelity: usize,
    },
    NegativeErrorBound {
        fidelity: usize,
        value: f64,
    },
    MeanOutOfRange {
        arm: usize,
        fidelity: usize,
        value: f64,
    },
    Inconsistent {
        arm: usize,
        fidelity: usize,
        deviation: f64,
        bound: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::TooFewArms { arms } => {
                write!(f, "no unique optimal arm: requires K>=2, got K={arms}")
            }
            Violation::TiedOptimum {
                first,
                second,
                mean,
            } => write!(
                f,
                "no unique optimal arm: arms {} and {} tie at top-fidelity mean {mean}",
                first + 1,
                second + 1
            ),
            Violation::NonPositiveCost { fidelity, value } => {
                write!(
                    f,
                    "cost at fidelity {} must be positive, got {value}",
                    fidelity + 1
                )
            }
            Violation::DecreasingCost { fidelity } => write!(
                f,
                "costs must be non-decreasing: fidelity {} costs more than fidelity {}",
                fidelity + 1,
                fidelity + 2
            ),
            Violation::NegativeErrorBound { fidelity, value } => write!(
                f,
                "error bound at fidelity {} must be non-negative, got {value}",
                fidelity + 1
            ),
            Violation::MeanOutOfRange {
                arm,
                fidelity,
                value,
            } => write!(
                f,
                "mean of arm {} at fidelity {} must lie in [0,1], got {value}",
                arm + 1,
                fidelity + 1
            ),
            Violation::Inconsistent {
                arm,
                fidelity,
                deviation,
                bound,
            } => write!(
                f,
                "arm {} at fidelity {}: |mu(m) - mu(M)| = {deviation} exceeds error bound {bound}",
                arm + 1,
                fidelity + 1
            ),
        }
    }
}

/// Non-fatal findings attached to a validated instance.
#[derive(Clone, Debug, PartialEq)]
pub enum Warning {
    /// The highest fidelity carries a non-zero error bound; the lower-bound
    /// formulas assume it is exact.
    BiasedTopFidelity { bound: f64 },
    /// A consistency violation accepted under [`Consistency::Warn`].
    Inconsistent(Violation),
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::BiasedTopFidelity { bound } => {
                write!(f, "top fidelity has non-zero error bound {bound}")
            }
            Warning::Inconsistent(v) => write!(f, "accepted inconsistency: {v}"),
        }
    }
}

/// How consistency violations (`|mu(m) - mu(M)| > zeta(m)`) are treated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Consistency {
    #[default]
    Enforce,
    /// Downgrade to warnings. Published instances are not always consistent.
    Warn,
}

/// A validated instance in canonical arm order (arm 0 is the unique best).
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    spec: InstanceSpec,
    original_index: Vec<usize>,
    warnings: Vec<Warning>,
}

impl Instance {
    pub fn spec(&self) -> &InstanceSpec {
        &self.spec
    }

    pub fn num_arms(&self) -> usize {
        self.spec.num_arms
    }

    pub fn num_fidelities(&self) -> usize {
        self.spec.num_fidelities
    }

    /// Index of the highest fidelity.
    pub fn top(&self) -> usize {
        self.spec.num_fidelities - 1
    }

    pub fn costs(&self) -> &[f64] {
        &self.spec.costs
    }

    pub fn cost(&self, fidelity: usize) -> f64 {
        self.spec.costs[fidelity]
    }

    pub fn error_bounds(&self) -> &[f64] {
        &self.spec.error_bounds
    }

    pub fn error_bound(&self, fidelity: usize) -> f64 {
        self.spec.error_bounds[fidelity]
    }

    pub fn mean(&self, arm: usize, fidelity: usize) -> f64 {
        self.spec.means[arm][fidelity]
    }

    /// True reward mean, i.e. the mean at the highest fidelity.
    pub fn true_mean(&self, arm: usize) -> f64 {
        self.spec.means[arm][self.top()]
    }

    pub fn distribution(&self) -> RewardDistribution {
        self.spec.distribution
    }

    /// Position of canonical arm `arm` in the spec that was validated.
    pub fn original_index(&self, arm: usize) -> usize {
        self.original_index[arm]
    }

    pub fn original_indices(&self) -> &[usize] {
        &self.original_index
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    /// Same instance with a different observation model.
    pub fn with_distribution(&self, distribution: RewardDistribution) -> Self {
        let mut out = self.clone();
        out.spec.distribution = distribution;
        out
    }
}

/// Validates `spec` under [`Consistency::Enforce`].
pub fn validate_instance(spec: &InstanceSpec) -> Result<Instance> {
    validate_instance_with(spec, Consistency::Enforce)
}

/// Checks every model constraint and returns the canonical instance.
///
/// Shape mismatches yield [`Error::Structural`]; all other broken constraints
/// are collected and returned together as [`Error::Invalid`]. Unsorted arms
/// are not an error: they are stably relabeled by decreasing top-fidelity mean.
pub fn validate_instance_with(spec: &InstanceSpec, consistency: Consistency) -> Result<Instance> {
    spec.check_shape()?;
    let mut violations = spec.value_violations();
    let mut warnings = Vec::new();
    let k = spec.num_arms;
    let top = spec.num_fidelities - 1;

    for fidelity in 0..top {
        if spec.costs[fidelity] > spec.costs[fidelity + 1] {
            violations.push(Violation::DecreasingCost { fidelity });
        }
    }

    for (arm, row) in spec.means.iter().enumerate() {
        for (fidelity, &mean) in row.iter().enumerate() {
            let deviation = (mean - row[top]).abs();
            let bound = spec.error_bounds[fidelity];
            if deviation > bound + CONSISTENCY_SLACK {
                let v = Violation::Inconsistent {
                    arm,
                    fidelity,
                    deviation,
                    bound,
                };
                match consistency {
                    Consistency::Enforce => violations.push(v),
                    Consistency::Warn => warnings.push(Warning::Inconsistent(v)),
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..k).collect();
    // sort_by is stable, so equal means keep their input order.
    order.sort_by(|&a, &b| spec.means[b][top].total_cmp(&spec.means[a][top]));

    if k < 2 {
        violations.push(Violation::TooFewArms { arms: k });
    } else if spec.means[order[0]][top] <= spec.means[order[1]][top] {
        violations.push(Violation::TiedOptimum {
            first: order[0],
            second: order[1],
            mean: spec.means[order[0]][top],
        });
    }

    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }

    if spec.error_bounds[top] > 0.0 {
        warnings.push(Warning::BiasedTopFidelity {
            bound: spec.error_bounds[top],
        });
    }

    let canonical = InstanceSpec {
        num_arms: k,
        num_fidelities: spec.num_fidelities,
        costs: spec.costs.clone(),
        error_bounds: spec.error_bounds.clone(),
        means: order.iter().map(|&i| spec.means[i].clone()).collect(),
        distribution: spec.distribution,
    };
    Ok(Instance {
        spec: canonical,
        original_index: order,
        warnings,
    })
}

/// Loads and validates an instance file in one step.
pub fn load_instance(path: impl AsRef<Path>, consistency: Consistency) -> Result<Instance> {
    let spec = InstanceSpec::load(path)?;
    validate_instance_with(&spec, consistency)
}
