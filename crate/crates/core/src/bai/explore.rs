//! Fidelity selection for an arm chosen by the LUCB loop.

use tracing::warn;

use super::state::{radius_from_log, BaiRunState};
use super::BaiConfig;
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::gaps::{argmax_first, efficiency, PriorMeans};

fn prior(cfg: &BaiConfig) -> Result<&PriorMeans> {
    cfg.prior
        .as_ref()
        .ok_or_else(|| Error::Parameter("this procedure needs prior means".into()))
}

fn pull(
    state: &mut BaiRunState,
    env: &mut Environment<'_>,
    arm: usize,
    fidelity: usize,
) -> Result<()> {
    let x = env.pull(arm, fidelity)?;
    state.record(arm, fidelity, x);
    Ok(())
}

/// Optimistic index of fidelity `m` for `arm`: estimated efficiency plus
/// `sqrt(2 ln N_k / (cost(m) N_k(m)))`.
pub fn f_ucb(
    state: &BaiRunState,
    env: &Environment<'_>,
    prior: &PriorMeans,
    arm: usize,
    fidelity: usize,
) -> f64 {
    let inst = env.instance();
    let n = state.count(arm, fidelity);
    if n == 0 {
        return f64::INFINITY;
    }
    let cost = inst.cost(fidelity);
    let gap = state.estimated_gap(inst, prior, state.leader(), arm, fidelity);
    let total = state.arm_total(arm) as f64;
    efficiency(gap, cost) + (2.0 * total.ln() / (cost * n as f64)).sqrt()
}

/// Explore-A: pull the fidelity with the largest f-UCB index. Unpulled
/// fidelities come first, lowest index first. Returns the fidelity pulled.
pub fn explore_a_step(
    state: &mut BaiRunState,
    env: &mut Environment<'_>,
    cfg: &BaiConfig,
    arm: usize,
) -> Result<usize> {
    let prior = *prior(cfg)?;
    let fidelity = match state.arm_counts(arm).iter().position(|&n| n == 0) {
        Some(m) => m,
        None => {
            argmax_first((0..state.num_fidelities()).map(|m| f_ucb(state, env, &prior, arm, m)))
                .expect("at least one fidelity")
        }
    };
    pull(state, env, arm, fidelity)?;
    Ok(fidelity)
}

/// What an Explore-B call did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExploreBStep {
    /// One pull at the already committed fidelity.
    Committed(usize),
    /// One pull at every fidelity; `commit` is set when the commit test
    /// passed afterwards.
    Uniform { commit: Option<usize> },
}

/// Threshold of the Explore-B commit test, `3 sqrt(ln(L/delta) / (cost(1) n))`.
pub fn commit_threshold(n: u64, delta: f64, factor: f64, lowest_cost: f64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    3.0 * ((factor / delta).ln() / (lowest_cost * n as f64)).sqrt()
}

/// Explore-B: sample every fidelity uniformly until the best estimated
/// efficiency clears the commit threshold, then stay on that fidelity.
///
/// The count in the threshold is the common per-fidelity count, taken as
/// the minimum over fidelities.
pub fn explore_b_step(
    state: &mut BaiRunState,
    env: &mut Environment<'_>,
    cfg: &BaiConfig,
    arm: usize,
) -> Result<ExploreBStep> {
    let prior = *prior(cfg)?;
    if let Some(m) = state.committed(arm) {
        pull(state, env, arm, m)?;
        return Ok(ExploreBStep::Committed(m));
    }
    for m in 0..state.num_fidelities() {
        pull(state, env, arm, m)?;
    }
    let inst = env.instance();
    let leader = state.leader();
    let scores = (0..state.num_fidelities()).map(|m| {
        efficiency(
            state.estimated_gap(inst, &prior, leader, arm, m),
            inst.cost(m),
        )
    });
    let best = argmax_first(scores.clone()).expect("at least one fidelity");
    let best_score = scores.clone().nth(best).expect("in range");
    let n = state.arm_counts(arm).iter().copied().min().unwrap_or(0);
    let threshold = commit_threshold(n, cfg.delta, cfg.confidence_factor, inst.cost(0));
    let commit = if best_score > threshold {
        state.commit(arm, best);
        Some(best)
    } else {
        None
    };
    Ok(ExploreBStep::Uniform { commit })
}

/// Fidelity Explore-C would pick: the lowest one whose confidence radius
/// still dominates its error bound, or the top fidelity if none does.
pub fn explore_c_fidelity(
    state: &BaiRunState,
    env: &Environment<'_>,
    cfg: &BaiConfig,
    arm: usize,
) -> usize {
    let inst = env.instance();
    let log = super::state::log_term(state.round(), cfg.delta, cfg.confidence_factor);
    let found = (0..state.num_fidelities())
        .find(|&m| radius_from_log(state.count(arm, m), log) >= inst.error_bound(m));
    match found {
        Some(m) => m,
        None => {
            warn!(
                arm,
                "no fidelity radius dominates its error bound; using top fidelity"
            );
            inst.top()
        }
    }
}

/// Explore-C: start cheap and climb the fidelity ladder as each level's
/// information is exhausted. Needs no prior. Returns the fidelity pulled.
pub fn explore_c_step(
    state: &mut BaiRunState,
    env: &mut Environment<'_>,
    cfg: &BaiConfig,
    arm: usize,
) -> Result<usize> {
    let fidelity = explore_c_fidelity(state, env, cfg, arm);
    pull(state, env, arm, fidelity)?;
    Ok(fidelity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bai::state::confidence_radius;
    use crate::bai::{BaiConfig, Procedure};
    use crate::instance::fixtures::*;
    use crate::instance::{validate_instance, InstanceSpec, RewardDistribution};

    fn cfg(procedure: Procedure, delta: f64, factor: f64) -> BaiConfig {
        BaiConfig {
            delta,
            confidence_factor: factor,
            procedure,
            prior: Some(PriorMeans::DEFAULT),
            max_pulls: None,
        }
    }

    #[test]
    fn explore_a_bootstraps_unpulled_fidelities() {
        let inst = deterministic_table2();
        let mut env = Environment::new(&inst, 0);
        let mut s = BaiRunState::for_instance(&inst);
        let c = cfg(Procedure::A, 0.1, 60.0);
        s.record(4, 0, 0.3);
        assert_eq!(explore_a_step(&mut s, &mut env, &c, 4).unwrap(), 1);
        assert_eq!(explore_a_step(&mut s, &mut env, &c, 4).unwrap(), 2);
    }

    #[test]
    fn explore_a_prefers_larger_bonus_when_scores_tie() {
        // Both fidelities share cost and error bound, so equal means give
        // equal estimated efficiency and the bonus decides.
        let inst = validate_instance(&InstanceSpec {
            num_arms: 2,
            num_fidelities: 2,
            costs: vec![1.0, 1.0],
            error_bounds: vec![0.0, 0.0],
            means: vec![vec![0.8, 0.8], vec![0.5, 0.5]],
            distribution: RewardDistribution::Deterministic,
        })
        .unwrap();
        let mut env = Environment::new(&inst, 0);
        let mut s = BaiRunState::for_instance(&inst);
        for _ in 0..10 {
            s.record(1, 0, 0.5);
        }
        s.record(1, 1, 0.5);
        let c = cfg(Procedure::A, 0.1, 16.0);
        assert_eq!(explore_a_step(&mut s, &mut env, &c, 1).unwrap(), 1);
    }

    #[test]
    fn explore_a_settles_on_ancillary_optimal_fidelity() {
        // Arm 5 of the deterministic instance: scores 0.35, 0.35/sqrt(1.1),
        // 0.45/sqrt(1.2). Once bonuses are small, fidelity 3 dominates.
        let inst = deterministic_table2();
        let mut env = Environment::new(&inst, 0);
        let mut s = BaiRunState::for_instance(&inst);
        let c = cfg(Procedure::A, 0.1, 60.0);
        let mut last = Vec::new();
        for i in 0..20_000 {
            let m = explore_a_step(&mut s, &mut env, &c, 4).unwrap();
            if i >= 19_000 {
                last.push(m);
            }
        }
        let share = last.iter().filter(|&&m| m == 2).count() as f64 / last.len() as f64;
        assert!(share > 0.9, "share at fidelity 3: {share}");
        assert!(s.count(4, 2) > s.count(4, 0) + s.count(4, 1));
    }

    #[test]
    fn explore_b_uniform_then_committed() {
        let inst = deterministic_table2();
        let mut env = Environment::new(&inst, 0);
        let mut s = BaiRunState::for_instance(&inst);
        let c = cfg(Procedure::B, 0.1, 600.0);
        let step = explore_b_step(&mut s, &mut env, &c, 4).unwrap();
        assert_eq!(step, ExploreBStep::Uniform { commit: None });
        assert_eq!(s.arm_counts(4), &[1, 1, 1]);

        s.commit(4, 2);
        for _ in 0..5 {
            assert_eq!(
                explore_b_step(&mut s, &mut env, &c, 4).unwrap(),
                ExploreBStep::Committed(2)
            );
        }
        assert_eq!(s.arm_counts(4), &[1, 1, 6]);
    }

    /// Smallest n with `3 sqrt(ln(L/delta)/n) < score`, by direct search.
    fn smallest_commit_n(score: f64, l_over_delta: f64) -> u64 {
        (1..)
            .find(|&n| 3.0 * (l_over_delta.ln() / n as f64).sqrt() < score)
            .unwrap()
    }

    #[test]
    fn explore_b_commit_point_matches_search() {
        let score = [0.35, 0.35 / 1.1f64.sqrt(), 0.45 / 1.2f64.sqrt()]
            .into_iter()
            .fold(f64::MIN, f64::max);
        assert!((score - 0.410791).abs() < 1e-6);
        let n_star = smallest_commit_n(score, 6000.0);
        assert_eq!(n_star, 464);

        let inst = deterministic_table2();
        let mut env = Environment::new(&inst, 0);
        let mut s = BaiRunState::for_instance(&inst);
        let c = cfg(Procedure::B, 0.1, 600.0);
        let mut calls = 0;
        loop {
            calls += 1;
            if let ExploreBStep::Uniform { commit: Some(m) } =
                explore_b_step(&mut s, &mut env, &c, 4).unwrap()
            {
                assert_eq!(m, 2);
                break;
            }
            assert!(calls < 10_000);
        }
        assert_eq!(calls, n_star);
    }

    #[test]
    fn explore_c_walks_the_ladder() {
        let inst = table2();
        let env = Environment::new(&inst, 0);
        let mut s = BaiRunState::for_instance(&inst);
        let c = cfg(Procedure::C, 0.1, 600.0);
        assert_eq!(explore_c_fidelity(&s, &env, &c, 0), 0);

        // Find counts where the radius at round 1000 is just below 0.30.
        s.set_round(1000);
        let log = (600.0f64 / 0.1).ln() + 4.0 * 1000f64.ln();
        let abandon = (1..).find(|&n| (log / n as f64).sqrt() < 0.30).unwrap();
        assert_eq!(abandon, 404);
        assert!(confidence_radius(403, 1000, 0.1, 600.0) >= 0.30);
        for _ in 0..abandon - 1 {
            s.record(0, 0, 1.0);
        }
        assert_eq!(explore_c_fidelity(&s, &env, &c, 0), 0);
        s.record(0, 0, 1.0);
        assert_eq!(explore_c_fidelity(&s, &env, &c, 0), 1);
    }

    #[test]
    fn explore_c_rule_walkthrough() {
        // zeta = (0.3, 0.15, 0); radius 0.2 at fidelities 1 and 2.
        let inst = table2();
        let env = Environment::new(&inst, 0);
        let mut s = BaiRunState::for_instance(&inst);
        let c = cfg(Procedure::C, 1.0, 1.0);
        s.set_round(2);
        let log = 4.0 * 2f64.ln();
        let n = (log / 0.04).round() as u64;
        for _ in 0..n {
            s.record(1, 0, 0.5);
            s.record(1, 1, 0.5);
        }
        let r = confidence_radius(n, 2, 1.0, 1.0);
        assert!((0.15..0.3).contains(&r), "radius {r}");
        assert_eq!(explore_c_fidelity(&s, &env, &c, 1), 1);
    }
}
