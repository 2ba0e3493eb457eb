//! Budgeted regret minimization by phased elimination.
//!
//! Reward for a pull is the arm's true mean regardless of fidelity, so the
//! ideal policy pulls the best arm at the cheapest fidelity. The algorithm
//! explores at the top fidelity in phases `p = 0, 1, ...`, bringing each
//! candidate's cumulative top-fidelity count up to
//! `ceil(4^p ln(budget / (4^p cost(M))))` and dropping arms whose phase mean
//! trails the leader by at least `2^(1-p)`. It stops exploring once one arm
//! remains or `p >= log2(2 / epsilon)`, then cycles through the survivors at
//! the lowest fidelity until no pull is affordable.

use serde::{Deserialize, Serialize};
use tracing::warn;

use crate::env::{Environment, Pull};
use crate::error::{Error, Result};
use crate::instance::Instance;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretConfig {
    pub budget: f64,
    /// Exploration accuracy; `None` selects `(K ln budget / budget)^(1/3)`.
    pub epsilon: Option<f64>,
}

impl RegretConfig {
    pub fn new(budget: f64) -> Self {
        Self {
            budget,
            epsilon: None,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = Some(epsilon);
        self
    }

    pub fn resolved_epsilon(&self, num_arms: usize) -> f64 {
        self.epsilon
            .unwrap_or_else(|| default_epsilon(num_arms, self.budget))
    }

    pub fn validate(&self, inst: &Instance) -> Result<()> {
        if !(self.budget.is_finite() && self.budget > 0.0) {
            return Err(Error::Parameter(format!(
                "budget must be positive, got {}",
                self.budget
            )));
        }
        if self.budget < inst.cost(inst.top()) {
            return Err(Error::Parameter(format!(
                "budget {} cannot afford a single top-fidelity pull (cost {})",
                self.budget,
                inst.cost(inst.top())
            )));
        }
        let eps = self.resolved_epsilon(inst.num_arms());
        if !(eps > 0.0) {
            return Err(Error::Parameter(format!(
                "epsilon must be positive, got {eps}"
            )));
        }
        if eps <= std::f64::consts::E / self.budget {
            warn!(
                epsilon = eps,
                budget = self.budget,
                "epsilon at or below e/budget"
            );
        }
        Ok(())
    }
}

/// `(K ln budget / budget)^(1/3)`.
pub fn default_epsilon(num_arms: usize, budget: f64) -> f64 {
    (num_arms as f64 * budget.ln() / budget).cbrt()
}

/// Ceiling that ignores rounding noise just above an integer.
fn ceil_snapped(x: f64) -> f64 {
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * x.abs().max(1.0) {
        nearest
    } else {
        x.ceil()
    }
}

/// Cumulative top-fidelity pull target of phase `phase`; `0` when the log
/// term is not positive.
pub fn phase_target(phase: u32, budget: f64, top_cost: f64) -> u64 {
    let scale = 4f64.powi(phase as i32);
    let log = (budget / (scale * top_cost)).ln();
    if !(log > 0.0) {
        return 0;
    }
    ceil_snapped(scale * log) as u64
}

/// Candidates that survive phase `phase`: those whose mean plus `2^(1-p)`
/// strictly exceeds the best candidate mean. `means` is indexed by arm.
pub fn eliminate(candidates: &[usize], means: &[f64], phase: u32) -> Vec<usize> {
    let best = candidates
        .iter()
        .map(|&k| means[k])
        .fold(f64::NEG_INFINITY, f64::max);
    let margin = 2f64.powi(1 - phase as i32);
    candidates
        .iter()
        .copied()
        .filter(|&k| means[k] + margin > best)
        .collect()
}

/// Expected regret of a pull sequence: `(budget / cost(1)) mu_1 - sum_t mu_{I_t}`.
pub fn pseudo_regret(inst: &Instance, budget: f64, log: &[Pull]) -> f64 {
    let earned: f64 = log.iter().map(|p| inst.true_mean(p.arm)).sum();
    optimal_reward(inst, budget) - earned
}

/// Same quantity computed from per-(arm, fidelity) counts.
pub fn pseudo_regret_from_counts(inst: &Instance, budget: f64, counts: &[Vec<u64>]) -> f64 {
    let earned: f64 = counts
        .iter()
        .enumerate()
        .map(|(k, row)| row.iter().sum::<u64>() as f64 * inst.true_mean(k))
        .sum();
    optimal_reward(inst, budget) - earned
}

fn optimal_reward(inst: &Instance, budget: f64) -> f64 {
    budget / inst.cost(0) * inst.true_mean(0)
}

/// Elimination bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct RegretRunState {
    pub phase: u32,
    pub candidates: Vec<usize>,
    /// Cumulative top-fidelity pulls per arm.
    pub top_counts: Vec<u64>,
    top_sums: Vec<f64>,
    /// Next position in the exploitation cycle.
    pub rotation: usize,
}

impl RegretRunState {
    pub fn new(num_arms: usize) -> Self {
        Self {
            phase: 0,
            candidates: (0..num_arms).collect(),
            top_counts: vec![0; num_arms],
            top_sums: vec![0.0; num_arms],
            rotation: 0,
        }
    }

    /// Mean of all top-fidelity observations of `arm` so far.
    pub fn top_mean(&self, arm: usize) -> f64 {
        match self.top_counts[arm] {
            0 => 0.0,
            n => self.top_sums[arm] / n as f64,
        }
    }

    fn record(&mut self, arm: usize, observation: f64) {
        self.top_counts[arm] += 1;
        self.top_sums[arm] += observation;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseTrace {
    pub phase: u32,
    pub target: u64,
    /// Phase means of the candidates, in candidate order.
    pub means: Vec<f64>,
    pub survivors: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegretResult {
    /// Regret accumulated pull by pull during the run.
    pub realized_regret: f64,
    /// Regret recomputed from the final pull counts.
    pub pseudo_regret: f64,
    pub total_pulls: u64,
    pub total_cost: f64,
    pub exploration_pulls: u64,
    pub phases: Vec<PhaseTrace>,
    pub final_candidates: Vec<usize>,
    /// The budget ran out in the middle of an exploration phase.
    pub exploration_truncated: bool,
    pub epsilon: f64,
}

/// Runs one elimination trial on a fresh environment.
pub fn run_regret(inst: &Instance, cfg: &RegretConfig, seed: u64) -> Result<RegretResult> {
    let mut env = Environment::new(inst, seed).without_log();
    run_regret_in(&mut env, cfg)
}

/// Runs the elimination algorithm against a fresh (unused) environment.
pub fn run_regret_in(env: &mut Environment<'_>, cfg: &RegretConfig) -> Result<RegretResult> {
    let inst = env.instance();
    cfg.validate(inst)?;
    if env.total_pulls() != 0 {
        return Err(Error::Parameter(
            "regret runs need an unused environment".into(),
        ));
    }
    let budget = cfg.budget;
    let top = inst.top();
    let epsilon = cfg.resolved_epsilon(inst.num_arms());
    let phase_limit = (2.0 / epsilon).log2();
    let optimum = optimal_reward(inst, budget);

    let mut state = RegretRunState::new(inst.num_arms());
    let mut earned = 0.0;
    let mut phases = Vec::new();
    let mut truncated = false;

    let mut pull = |env: &mut Environment<'_>, arm: usize, fidelity: usize| -> Result<f64> {
        let x = env.pull(arm, fidelity)?;
        earned += inst.true_mean(arm);
        Ok(x)
    };

    'explore: while f64::from(state.phase) < phase_limit && state.candidates.len() > 1 {
        let target = phase_target(state.phase, budget, inst.cost(top));
        if target == 0 {
            break;
        }
        for i in 0..state.candidates.len() {
            let arm = state.candidates[i];
            while state.top_counts[arm] < target {
                if !env.can_afford(budget, top) {
                    truncated = true;
                    break 'explore;
                }
                let x = pull(env, arm, top)?;
                state.record(arm, x);
            }
        }
        let means: Vec<f64> = (0..inst.num_arms()).map(|k| state.top_mean(k)).collect();
        let survivors = eliminate(&state.candidates, &means, state.phase);
        phases.push(PhaseTrace {
            phase: state.phase,
            target,
            means: state.candidates.iter().map(|&k| means[k]).collect(),
            survivors: survivors.clone(),
        });
        state.candidates = survivors;
        state.phase += 1;
    }
    if truncated {
        warn!(phase = state.phase, "budget exhausted during exploration");
    }
    let exploration_pulls = env.total_pulls();

    while env.can_afford(budget, 0) {
        let arm = state.candidates[state.rotation % state.candidates.len()];
        pull(env, arm, 0)?;
        state.rotation += 1;
    }

    Ok(RegretResult {
        realized_regret: optimum - earned,
        pseudo_regret: pseudo_regret_from_counts(inst, budget, env.counts()),
        total_pulls: env.total_pulls(),
        total_cost: env.spent(),
        exploration_pulls,
        phases,
        final_candidates: state.candidates,
        exploration_truncated: truncated,
        epsilon,
    })
}
