//! Best-arm identification with fixed confidence.
//!
//! [`run_bai`] is an LUCB loop over the canonical instance: every round it
//! ranks arms by upper confidence bound, stops once the leader's lower bound
//! clears the runner-up's upper bound, and otherwise explores both critical
//! arms with one of three fidelity selection procedures:
//!
//! - [`Procedure::A`]: optimistic index over fidelity efficiency (f-UCB).
//! - [`Procedure::B`]: uniform over fidelities, then commit to a good one.
//! - [`Procedure::C`]: climb the fidelity ladder, no prior required.
//!
//! Bounds at round `t` for arm `k` use every fidelity it has been pulled at,
//! `mean(m) +- (zeta(m) + sqrt(ln(L t^4 / delta) / N_k(m)))`, keeping the
//! tightest.

mod explore;
mod state;

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub use explore::{
    commit_threshold, explore_a_step, explore_b_step, explore_c_fidelity, explore_c_step, f_ucb,
    ExploreBStep,
};
pub use state::{confidence_radius, select_critical_arms, BaiRunState};

use crate::env::Environment;
use crate::error::{Error, Result};
use crate::gaps::PriorMeans;
use crate::instance::{Instance, RewardDistribution};

/// Default safety cap on the number of pulls per run.
pub const DEFAULT_MAX_PULLS: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Procedure {
    #[serde(rename = "a")]
    A,
    #[serde(rename = "b")]
    B,
    #[serde(rename = "c")]
    C,
}

impl Procedure {
    pub const ALL: [Procedure; 3] = [Procedure::A, Procedure::B, Procedure::C];

    pub fn needs_prior(self) -> bool {
        matches!(self, Procedure::A | Procedure::B)
    }
}

impl fmt::Display for Procedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Procedure::A => "a",
            Procedure::B => "b",
            Procedure::C => "c",
        })
    }
}

impl FromStr for Procedure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(Procedure::A),
            "b" => Ok(Procedure::B),
            "c" => Ok(Procedure::C),
            other => Err(Error::Parameter(format!(
                "unknown procedure {other:?}, expected a, b or c"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaiConfig {
    /// Allowed probability of returning a wrong arm.
    pub delta: f64,
    /// Confidence-radius factor `L`; correctness needs `L >= 4KM`.
    pub confidence_factor: f64,
    pub procedure: Procedure,
    /// Required by procedures A and B.
    pub prior: Option<PriorMeans>,
    /// Safety cap on pulls; `None` means [`DEFAULT_MAX_PULLS`].
    pub max_pulls: Option<u64>,
}

impl BaiConfig {
    /// Config with `L = 4KM` and the default cap.
    pub fn new(
        inst: &Instance,
        procedure: Procedure,
        delta: f64,
        prior: Option<PriorMeans>,
    ) -> Self {
        Self {
            delta,
            confidence_factor: min_confidence_factor(inst),
            procedure,
            prior,
            max_pulls: None,
        }
    }

    pub fn validate(&self, inst: &Instance) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Parameter(format!(
                "delta must lie in (0,1), got {}",
                self.delta
            )));
        }
        let min_l = min_confidence_factor(inst);
        if !(self.confidence_factor >= min_l) {
            return Err(Error::Parameter(format!(
                "confidence factor L={} is below 4KM={min_l}",
                self.confidence_factor
            )));
        }
        if self.procedure.needs_prior() && self.prior.is_none() {
            return Err(Error::Parameter(format!(
                "procedure {} needs prior means (mu1_tilde, mu2_tilde)",
                self.procedure
            )));
        }
        Ok(())
    }
}

/// `4KM`, the smallest confidence factor with a correctness guarantee.
pub fn min_confidence_factor(inst: &Instance) -> f64 {
    4.0 * (inst.num_arms() * inst.num_fidelities()) as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminatedBy {
    StoppingRule,
    Cap,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaiResult {
    /// Canonical (0-based) index of the returned arm; `0` is correct.
    pub chosen_arm: usize,
    pub total_cost: f64,
    /// Completed LUCB rounds.
    pub rounds: u64,
    pub total_pulls: u64,
    /// Pull counts indexed `[arm][fidelity]`.
    pub counts: Vec<Vec<u64>>,
    /// Committed fidelities (procedure B only).
    pub committed: Vec<Option<usize>>,
    pub terminated_by: TerminatedBy,
}

impl BaiResult {
    pub fn success(&self) -> bool {
        self.chosen_arm == 0
    }
}

/// Runs one best-arm identification trial on a fresh environment.
pub fn run_bai(inst: &Instance, cfg: &BaiConfig, seed: u64) -> Result<BaiResult> {
    let mut env = Environment::new(inst, seed).without_log();
    run_bai_in(&mut env, cfg)
}

/// Runs the LUCB loop against an existing environment.
pub fn run_bai_in(env: &mut Environment<'_>, cfg: &BaiConfig) -> Result<BaiResult> {
    let inst = env.instance();
    cfg.validate(inst)?;
    let cap = cfg.max_pulls.unwrap_or(DEFAULT_MAX_PULLS);
    let k = inst.num_arms();
    let check_intervals = cfg!(debug_assertions)
        && inst.distribution() == RewardDistribution::Deterministic
        && inst.warnings().is_empty();

    let mut state = BaiRunState::for_instance(inst);
    let mut ucbs = vec![0.0; k];
    let mut lcbs = vec![0.0; k];
    let start_pulls = env.total_pulls();
    let start_cost = env.spent();
    let mut round: u64 = 1;

    let terminated_by = loop {
        state.set_round(round);
        let log = state::log_term(round, cfg.delta, cfg.confidence_factor);
        for arm in 0..k {
            let (u, l) = state.ucb_lcb_with_log(inst, log, arm);
            if check_intervals && state.arm_total(arm) > 0 {
                debug_assert!(l <= u, "arm {arm}: LCB {l} > UCB {u}");
            }
            ucbs[arm] = u;
            lcbs[arm] = l;
        }
        let (leader, challenger) = select_critical_arms(&ucbs);
        state.set_critical(leader, challenger);
        if lcbs[leader] > ucbs[challenger] {
            break TerminatedBy::StoppingRule;
        }
        if env.total_pulls() - start_pulls >= cap {
            break TerminatedBy::Cap;
        }
        for arm in [challenger, leader] {
            match cfg.procedure {
                Procedure::A => {
                    explore_a_step(&mut state, env, cfg, arm)?;
                }
                Procedure::B => {
                    explore_b_step(&mut state, env, cfg, arm)?;
                }
                Procedure::C => {
                    explore_c_step(&mut state, env, cfg, arm)?;
                }
            }
        }
        round += 1;
    };

    Ok(BaiResult {
        chosen_arm: state.leader(),
        total_cost: env.spent() - start_cost,
        rounds: round - 1,
        total_pulls: env.total_pulls() - start_pulls,
        counts: state.count_matrix(),
        committed: (0..k).map(|a| state.committed(a)).collect(),
        terminated_by,
    })
}
