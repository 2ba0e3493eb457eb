//! Reward gaps, optimal fidelities, and hardness coefficients.
//!
//! For a suboptimal arm `k` the gap at fidelity `m` is the distance from the
//! best arm's true mean down to the most optimistic value arm `k` could have
//! given its fidelity-`m` mean, `mu_1 - (mu_k(m) + zeta(m))`. For the best arm
//! it is the distance from its most pessimistic value down to the runner-up,
//! `(mu_1(m) - zeta(m)) - mu_2`. Gaps can be negative; they are stored as is.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;

/// Prior proxies for the top two true means: an upper bound for the best
/// arm and a lower bound for the runner-up.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorMeans {
    pub mu1_tilde: f64,
    pub mu2_tilde: f64,
}

impl PriorMeans {
    /// Values used for the published Explore-A/B comparisons.
    pub const DEFAULT: PriorMeans = PriorMeans {
        mu1_tilde: 0.95,
        mu2_tilde: 0.75,
    };

    pub fn new(mu1_tilde: f64, mu2_tilde: f64) -> Result<Self> {
        let in_unit = |x: f64| (0.0..=1.0).contains(&x);
        if !in_unit(mu1_tilde) || !in_unit(mu2_tilde) {
            return Err(Error::Parameter(format!(
                "prior means must lie in [0,1], got ({mu1_tilde}, {mu2_tilde})"
            )));
        }
        if mu1_tilde <= mu2_tilde {
            return Err(Error::Parameter(format!(
                "prior upper bound {mu1_tilde} must exceed lower bound {mu2_tilde}"
            )));
        }
        Ok(Self {
            mu1_tilde,
            mu2_tilde,
        })
    }

    /// The true top-two means of `inst`; ancillary gaps then equal the true gaps.
    pub fn exact(inst: &Instance) -> Self {
        Self {
            mu1_tilde: inst.true_mean(0),
            mu2_tilde: inst.true_mean(1),
        }
    }
}

/// `K x M` matrix of (possibly negative) gaps, indexed `[arm][fidelity]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapTable {
    gaps: Vec<Vec<f64>>,
}

impl GapTable {
    pub fn from_rows(gaps: Vec<Vec<f64>>) -> Self {
        Self { gaps }
    }

    pub fn get(&self, arm: usize, fidelity: usize) -> f64 {
        self.gaps[arm][fidelity]
    }

    pub fn row(&self, arm: usize) -> &[f64] {
        &self.gaps[arm]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.gaps
    }

    pub fn num_arms(&self) -> usize {
        self.gaps.len()
    }
}

/// Gap of `arm` at `fidelity` against reference top-two values `best` and
/// `runner_up`, given the arm's mean `mean` at that fidelity.
#[inline]
pub(crate) fn gap_against(is_leader: bool, mean: f64, zeta: f64, best: f64, runner_up: f64) -> f64 {
    if is_leader {
        (mean - zeta) - runner_up
    } else {
        best - (mean + zeta)
    }
}

fn gap_table(inst: &Instance, best: f64, runner_up: f64) -> GapTable {
    let gaps = (0..inst.num_arms())
        .map(|k| {
            (0..inst.num_fidelities())
                .map(|m| {
                    gap_against(
                        k == 0,
                        inst.mean(k, m),
                        inst.error_bound(m),
                        best,
                        runner_up,
                    )
                })
                .collect()
        })
        .collect();
    GapTable { gaps }
}

/// True reward gaps.
pub fn reward_gaps(inst: &Instance) -> GapTable {
    gap_table(inst, inst.true_mean(0), inst.true_mean(1))
}

/// Gaps with the unknown top-two means replaced by prior proxies.
pub fn ancillary_gaps(inst: &Instance, prior: &PriorMeans) -> GapTable {
    gap_table(inst, prior.mu1_tilde, prior.mu2_tilde)
}

/// Gap per unit square-root cost, the efficiency score of a fidelity.
#[inline]
pub fn efficiency(gap: f64, cost: f64) -> f64 {
    gap / cost.sqrt()
}

/// Index of the largest value, lowest index on ties.
pub(crate) fn argmax_first(values: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// Most efficient fidelity per arm: `argmax_m gap / sqrt(cost)`.
///
/// Fails for an arm whose gap is non-positive at every fidelity.
pub fn optimal_fidelity(gaps: &GapTable, costs: &[f64]) -> Result<Vec<usize>> {
    gaps.rows()
        .iter()
        .enumerate()
        .map(|(arm, row)| {
            if row.iter().all(|&g| g <= 0.0) {
                return Err(Error::Indistinguishable { arm });
            }
            let m = argmax_first(row.iter().zip(costs).map(|(&g, &c)| efficiency(g, c)))
                .expect("non-empty fidelity set");
            Ok(m)
        })
        .collect()
}

/// Hardness coefficients of an instance. Fidelity indices are 0-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardnessReport {
    /// Optimal fidelity per arm under the true gaps.
    pub m_star: Vec<usize>,
    /// Optimal fidelity per arm under the ancillary gaps.
    pub m_tilde_star: Vec<usize>,
    /// Lowest fidelity where the gap exceeds twice the error bound, if any.
    pub m_ddagger: Vec<Option<usize>>,
    /// Sum of `cost(m*) / gap(m*)^2`.
    pub h: f64,
    /// Same sum over the ancillary gaps and fidelities.
    pub h_tilde: f64,
    /// Cost of telling the ancillary optimal fidelity apart from the others.
    /// Infinite when another fidelity ties it exactly.
    pub g_tilde: f64,
    /// `None` when some arm has no fidelity with `gap > 2 zeta`.
    pub h_ddagger: Option<f64>,
    /// Cost of climbing the fidelity ladder; `None` together with `h_ddagger`.
    pub q: Option<f64>,
}

fn cost_over_gap_sq(cost: f64, gap: f64) -> f64 {
    cost / (gap * gap)
}

/// Computes every hardness coefficient for `inst` under `prior`.
pub fn hardness(inst: &Instance, prior: &PriorMeans) -> Result<HardnessReport> {
    let costs = inst.costs();
    let zetas = inst.error_bounds();
    let gaps = reward_gaps(inst);
    let tilde = ancillary_gaps(inst, prior);

    let m_star = optimal_fidelity(&gaps, costs)?;
    let m_tilde_star = optimal_fidelity(&tilde, costs)?;

    let h = m_star
        .iter()
        .enumerate()
        .map(|(k, &m)| cost_over_gap_sq(costs[m], gaps.get(k, m)))
        .sum();
    let h_tilde = m_tilde_star
        .iter()
        .enumerate()
        .map(|(k, &m)| cost_over_gap_sq(costs[m], tilde.get(k, m)))
        .sum();

    let mut g_tilde = 0.0;
    for (k, &best) in m_tilde_star.iter().enumerate() {
        let top = efficiency(tilde.get(k, best), costs[best]);
        for m in (0..inst.num_fidelities()).filter(|&m| m != best) {
            let diff = top - efficiency(tilde.get(k, m), costs[m]);
            g_tilde += 1.0 / (diff * diff);
        }
    }

    let m_ddagger: Vec<Option<usize>> = (0..inst.num_arms())
        .map(|k| (0..inst.num_fidelities()).find(|&m| gaps.get(k, m) > 2.0 * zetas[m]))
        .collect();
    let (h_ddagger, q) = if m_ddagger.iter().all(Option::is_some) {
        let mut h_dd = 0.0;
        let mut q = 0.0;
        for (k, m) in m_ddagger.iter().enumerate() {
            let m = m.expect("checked above");
            h_dd += cost_over_gap_sq(costs[m], gaps.get(k, m));
            q += (0..m)
                .map(|j| costs[j] / (zetas[j] * zetas[j]))
                .sum::<f64>();
        }
        (Some(h_dd), Some(q))
    } else {
        (None, None)
    };

    Ok(HardnessReport {
        m_star,
        m_tilde_star,
        m_ddagger,
        h,
        h_tilde,
        g_tilde,
        h_ddagger,
        q,
    })
}
