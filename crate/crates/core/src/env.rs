//! Simulated multi-fidelity environment with a cost ledger.

use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::{Instance, RewardDistribution};
use crate::rng::{trial_rng, TrialRng};

/// Relative slack on budget comparisons, absorbing rounding in the running
/// cost sum. The ledger never exceeds `budget * (1 + BUDGET_SLACK)`.
pub const BUDGET_SLACK: f64 = 1e-9;

/// One executed pull. `slot` is the 1-based time slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pull {
    pub slot: u64,
    pub arm: usize,
    pub fidelity: usize,
    pub observation: f64,
}

/// Seeded environment for a single trial.
///
/// Keeps a per-(arm, fidelity) pull counter and, unless disabled with
/// [`Environment::without_log`], the full pull log. Long best-arm runs can
/// take millions of pulls, so harness code turns the log off.
#[derive(Clone, Debug)]
pub struct Environment<'a> {
    instance: &'a Instance,
    seed: u64,
    rng: TrialRng,
    spent: f64,
    pulls: u64,
    counts: Vec<Vec<u64>>,
    log: Option<Vec<Pull>>,
}

impl<'a> Environment<'a> {
    pub fn new(instance: &'a Instance, seed: u64) -> Self {
        Self {
            instance,
            seed,
            rng: trial_rng(seed),
            spent: 0.0,
            pulls: 0,
            counts: vec![vec![0; instance.num_fidelities()]; instance.num_arms()],
            log: Some(Vec::new()),
        }
    }

    pub fn without_log(mut self) -> Self {
        self.log = None;
        self
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Pulls `arm` at `fidelity`, charging its cost.
    pub fn pull(&mut self, arm: usize, fidelity: usize) -> Result<f64> {
        let inst = self.instance;
        if arm >= inst.num_arms() {
            return Err(Error::OutOfRange {
                what: "arm",
                index: arm,
                limit: inst.num_arms(),
            });
        }
        if fidelity >= inst.num_fidelities() {
            return Err(Error::OutOfRange {
                what: "fidelity",
                index: fidelity,
                limit: inst.num_fidelities(),
            });
        }
        let mean = inst.mean(arm, fidelity);
        let observation = match inst.distribution() {
            RewardDistribution::Bernoulli => {
                if self.rng.gen_bool(mean) {
                    1.0
                } else {
                    0.0
                }
            }
            RewardDistribution::Deterministic => mean,
        };
        self.spent += inst.cost(fidelity);
        self.pulls += 1;
        self.counts[arm][fidelity] += 1;
        if let Some(log) = self.log.as_mut() {
            log.push(Pull {
                slot: self.pulls,
                arm,
                fidelity,
                observation,
            });
        }
        Ok(observation)
    }

    /// Cumulative cost of all pulls so far.
    pub fn spent(&self) -> f64 {
        self.spent
    }

    pub fn total_pulls(&self) -> u64 {
        self.pulls
    }

    pub fn count(&self, arm: usize, fidelity: usize) -> u64 {
        self.counts[arm][fidelity]
    }

    /// Pull counts indexed `[arm][fidelity]`.
    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn log(&self) -> Option<&[Pull]> {
        self.log.as_deref()
    }

    pub fn remaining_budget(&self, budget: f64) -> f64 {
        budget - self.spent
    }

    /// Whether one more pull at `fidelity` keeps the ledger within `budget`.
    /// The boundary is included.
    pub fn can_afford(&self, budget: f64, fidelity: usize) -> bool {
        self.spent + self.instance.cost(fidelity) <= budget * (1.0 + BUDGET_SLACK)
    }
}
