//! Closed-form bound expressions evaluated on a concrete instance.
//!
//! Upper bounds are reported without their `O(.)` constants and lower bounds
//! with the distribution-dependent constant set to one. The numbers are
//! shape-only curves for comparison against simulation, not certified bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaps::{hardness, optimal_fidelity, reward_gaps, HardnessReport, PriorMeans};
use crate::instance::Instance;

/// Bernoulli relative entropy `kl(p, q)` with `0 ln 0 = 0`.
///
/// `q` on the boundary gives `0` if `p` matches it and `+inf` otherwise.
pub fn bernoulli_kl(p: f64, q: f64) -> f64 {
    if q <= 0.0 {
        return if p <= 0.0 { 0.0 } else { f64::INFINITY };
    }
    if q >= 1.0 {
        return if p >= 1.0 { 0.0 } else { f64::INFINITY };
    }
    let term = |x: f64, y: f64| if x == 0.0 { 0.0 } else { x * (x / y).ln() };
    term(p, q) + term(1.0 - p, 1.0 - q)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BaiLowerBound {
    /// KL form over Bernoulli alternatives, times `ln(1 / (2.4 delta))`.
    pub kl_value: f64,
    /// `sum_k min_{m: gap > 0} cost(m) / gap(m)^2 * ln(1 / delta)`.
    pub simplified_value: f64,
}

/// Lower bounds on the expected cost of any `delta`-correct algorithm.
///
/// The KL form shifts each arm's fidelity-`m` Bernoulli mean to the value
/// that would make it swap places with the best arm (or, for the best arm,
/// with the runner-up). Fidelities whose shifted target leaves `(0, 1)` or
/// lies on the wrong side of the arm's mean are skipped.
pub fn bai_lower_bound(inst: &Instance, delta: f64) -> Result<BaiLowerBound> {
    if inst.error_bound(inst.top()) > 0.0 {
        return Err(Error::Parameter(
            "lower bound needs an exact top fidelity (zero error bound)".into(),
        ));
    }
    if !(delta > 0.0) {
        return Err(Error::Parameter(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let kl_log = (1.0 / (2.4 * delta)).ln();
    if kl_log < 0.0 {
        return Err(Error::Parameter(format!(
            "delta {delta} >= 1/2.4 makes the KL log factor negative"
        )));
    }
    let best = inst.true_mean(0);
    let runner_up = inst.true_mean(1);
    let mut kl_sum = 0.0;
    for k in 0..inst.num_arms() {
        let mut term = f64::INFINITY;
        for m in 0..inst.num_fidelities() {
            let mean = inst.mean(k, m);
            let zeta = inst.error_bound(m);
            let (target, admissible) = if k == 0 {
                let q = runner_up + zeta;
                (q, q < mean)
            } else {
                let q = best - zeta;
                (q, q > mean)
            };
            if admissible && target > 0.0 && target < 1.0 {
                term = term.min(inst.cost(m) / bernoulli_kl(mean, target));
            }
        }
        if !term.is_finite() {
            return Err(Error::Indistinguishable { arm: k });
        }
        kl_sum += term;
    }

    let gaps = reward_gaps(inst);
    let mut simple_sum = 0.0;
    for k in 0..inst.num_arms() {
        let term = (0..inst.num_fidelities())
            .filter(|&m| gaps.get(k, m) > 0.0)
            .map(|m| inst.cost(m) / gaps.get(k, m).powi(2))
            .fold(f64::INFINITY, f64::min);
        if !term.is_finite() {
            return Err(Error::Indistinguishable { arm: k });
        }
        simple_sum += term;
    }

    Ok(BaiLowerBound {
        kl_value: kl_sum * kl_log,
        simplified_value: simple_sum * (1.0 / delta).ln(),
    })
}

/// A bound of the form `first + second`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TwoTermBound {
    pub first: f64,
    pub second: f64,
    /// The second term's log-log factor was not positive and was set to 0.
    pub second_clamped: bool,
}

impl TwoTermBound {
    pub fn total(&self) -> f64 {
        self.first + self.second
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaiUpperBounds {
    pub explore_a: TwoTermBound,
    pub explore_b: f64,
    /// `None` when some arm has no fidelity with `gap > 2 zeta`.
    pub explore_c: Option<TwoTermBound>,
    pub hardness: HardnessReport,
}

/// Cost-complexity upper bound expressions of the three procedures.
pub fn bai_upper_bounds(
    inst: &Instance,
    prior: &PriorMeans,
    delta: f64,
    factor: f64,
) -> Result<BaiUpperBounds> {
    if !(delta > 0.0 && delta < 1.0) || !(factor > 0.0) {
        return Err(Error::Parameter(format!(
            "need delta in (0,1) and L > 0, got delta={delta}, L={factor}"
        )));
    }
    let hr = hardness(inst, prior)?;
    let lowest = inst.cost(0);
    let (h, g) = (hr.h_tilde, hr.g_tilde);

    let log_a = (factor * (h + g) / (lowest * delta)).ln();
    let (second, second_clamped) = if log_a > 1.0 {
        (g * log_a.ln(), false)
    } else {
        (0.0, true)
    };
    let explore_a = TwoTermBound {
        first: h * log_a,
        second,
        second_clamped,
    };

    let ratio_sum: f64 = inst.costs().iter().map(|c| c / lowest).sum();
    let explore_b = h * ratio_sum * (ratio_sum * h * factor / (lowest * delta)).ln();

    let explore_c = match (hr.h_ddagger, hr.q) {
        (Some(hd), Some(q)) => {
            let log_c = (factor * (hd + q) / (lowest * delta)).ln();
            Some(TwoTermBound {
                first: hd * log_c,
                second: q * log_c,
                second_clamped: false,
            })
        }
        _ => None,
    };

    Ok(BaiUpperBounds {
        explore_a,
        explore_b,
        explore_c,
        hardness: hr,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssumptionCheck {
    pub holds: bool,
    /// Canonical indices of suboptimal arms breaking the inequality.
    pub violating: Vec<usize>,
}

/// Checks `mu_2 >= mu_k(m*_k) + zeta(m*_k)` for every suboptimal arm `k`.
pub fn check_assumption_arm2(inst: &Instance) -> Result<AssumptionCheck> {
    let m_star = optimal_fidelity(&reward_gaps(inst), inst.costs())?;
    let runner_up = inst.true_mean(1);
    let violating: Vec<usize> = (1..inst.num_arms())
        .filter(|&k| {
            let m = m_star[k];
            runner_up < inst.mean(k, m) + inst.error_bound(m)
        })
        .collect();
    Ok(AssumptionCheck {
        holds: violating.is_empty(),
        violating,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegretBounds {
    /// Asymptotic lower-bound coefficient of `ln(budget)` (unit constant).
    pub dep_lb_coeff: f64,
    /// Asymptotic upper-bound coefficient of `ln(budget)`.
    pub dep_ub_coeff: f64,
    /// Finite-budget problem-dependent upper bound.
    pub finite_dep_ub: f64,
    /// Closed-form worst-case upper bound; `None` when `budget <= 16 cost(M)`.
    pub indep_ub: Option<f64>,
    pub epsilon: f64,
}

/// Regret bound expressions for `budget` and exploration accuracy `epsilon`.
///
/// Regret gaps are `mu_1 - mu_k` with the best arm's gap taken as zero; the
/// best arm therefore drops out of both asymptotic coefficients.
pub fn regret_bounds(inst: &Instance, budget: f64, epsilon: f64) -> Result<RegretBounds> {
    if !(epsilon > 0.0) {
        return Err(Error::Parameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if !(budget > 0.0) {
        return Err(Error::Parameter(format!(
            "budget must be positive, got {budget}"
        )));
    }
    let top = inst.top();
    let best = inst.true_mean(0);
    let lowest = inst.cost(0);
    let top_cost = inst.cost(top);
    let gaps = reward_gaps(inst);
    let regret_gap = |k: usize| {
        if k == 0 {
            0.0
        } else {
            best - inst.true_mean(k)
        }
    };
    let unit_regret = |k: usize, m: usize| inst.cost(m) / lowest * best - inst.true_mean(k);

    let mut dep_lb = 0.0;
    let mut dep_ub = 0.0;
    for k in 1..inst.num_arms() {
        let r = regret_gap(k);
        if !(r > 0.0) {
            return Err(Error::Indistinguishable { arm: k });
        }
        dep_lb += (0..inst.num_fidelities())
            .filter(|&m| gaps.get(k, m) > 0.0)
            .map(|m| unit_regret(k, m) / gaps.get(k, m).powi(2))
            .fold(f64::INFINITY, f64::min);
        dep_ub += unit_regret(k, top) * 16.0 / (r * r);
    }

    let mut near_max: f64 = 0.0;
    let mut far_sum = 0.0;
    let mut near_sum = 0.0;
    for k in 0..inst.num_arms() {
        let r = regret_gap(k);
        let c = unit_regret(k, top);
        if r > epsilon {
            let r2 = r * r;
            far_sum += c * (16.0 / r2 * (budget * r2 / (16.0 * top_cost)).ln() + 48.0 / r2 + 1.0)
                + 64.0 / r;
        } else {
            near_max = near_max.max(budget / lowest * r);
            let e2 = epsilon * epsilon;
            near_sum += c
                * (16.0 / e2 * (budget * e2 / (16.0 * top_cost)).ln() + 32.0 / (3.0 * e2) + 1.0)
                + 64.0 / epsilon;
        }
    }

    let indep_log = (budget / (16.0 * top_cost)).ln();
    let indep_ub = (indep_log > 0.0).then(|| {
        let k = inst.num_arms() as f64;
        2.0 * (16.0 * k * best * top_cost / lowest * indep_log).cbrt()
            * (budget / lowest).powf(2.0 / 3.0)
    });

    Ok(RegretBounds {
        dep_lb_coeff: dep_lb,
        dep_ub_coeff: dep_ub,
        finite_dep_ub: near_max + far_sum + near_sum,
        indep_ub,
        epsilon,
    })
}

/// Every analytical quantity for one instance, flattened for reporting.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub delta: f64,
    pub confidence_factor: f64,
    pub prior: PriorMeans,
    pub gaps: Vec<Vec<f64>>,
    pub hardness: HardnessReport,
    pub bai_lower: Option<BaiLowerBound>,
    pub bai_upper: BaiUpperBounds,
    pub assumption_arm2: AssumptionCheck,
    pub budget: Option<f64>,
    pub regret: Option<RegretBounds>,
}

/// Builds a full report. `regret` is `(budget, epsilon)`; the KL lower bound
/// is omitted (not an error) when the instance does not admit it.
pub fn bound_report(
    inst: &Instance,
    prior: &PriorMeans,
    delta: f64,
    factor: f64,
    regret: Option<(f64, f64)>,
) -> Result<BoundReport> {
    let bai_upper = bai_upper_bounds(inst, prior, delta, factor)?;
    let regret_bounds = regret
        .map(|(budget, eps)| regret_bounds(inst, budget, eps))
        .transpose()?;
    Ok(BoundReport {
        delta,
        confidence_factor: factor,
        prior: *prior,
        gaps: reward_gaps(inst).rows().to_vec(),
        hardness: bai_upper.hardness.clone(),
        bai_lower: bai_lower_bound(inst, delta).ok(),
        bai_upper,
        assumption_arm2: check_assumption_arm2(inst)?,
        budget: regret.map(|r| r.0),
        regret: regret_bounds,
    })
}

/// One line of a bound report in CSV form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub quantity: String,
    pub value: Option<f64>,
}

impl BoundReport {
    pub fn csv_rows(&self) -> Vec<BoundRow> {
        self.rows()
            .into_iter()
            .map(|(quantity, value)| BoundRow { quantity, value })
            .collect()
    }

    /// `(quantity, value)` pairs; undefined quantities have no value.
    /// Fidelity and arm numbers in names and values are 1-based.
    pub fn rows(&self) -> Vec<(String, Option<f64>)> {
        let mut rows: Vec<(String, Option<f64>)> = vec![
            ("delta".into(), Some(self.delta)),
            ("confidence_factor".into(), Some(self.confidence_factor)),
            ("mu1_tilde".into(), Some(self.prior.mu1_tilde)),
            ("mu2_tilde".into(), Some(self.prior.mu2_tilde)),
        ];
        for (k, row) in self.gaps.iter().enumerate() {
            for (m, g) in row.iter().enumerate() {
                rows.push((format!("gap[{}][{}]", k + 1, m + 1), Some(*g)));
            }
        }
        let hr = &self.hardness;
        for k in 0..hr.m_star.len() {
            rows.push((
                format!("m_star[{}]", k + 1),
                Some((hr.m_star[k] + 1) as f64),
            ));
            rows.push((
                format!("m_tilde_star[{}]", k + 1),
                Some((hr.m_tilde_star[k] + 1) as f64),
            ));
            rows.push((
                format!("m_ddagger[{}]", k + 1),
                hr.m_ddagger[k].map(|m| (m + 1) as f64),
            ));
        }
        rows.extend([
            ("H".into(), Some(hr.h)),
            ("H_tilde".into(), Some(hr.h_tilde)),
            ("G_tilde".into(), Some(hr.g_tilde)),
            ("H_ddagger".into(), hr.h_ddagger),
            ("Q".into(), hr.q),
            ("bai_lb_kl".into(), self.bai_lower.map(|b| b.kl_value)),
            (
                "bai_lb_simplified".into(),
                self.bai_lower.map(|b| b.simplified_value),
            ),
            (
                "bai_ub_a_first".into(),
                Some(self.bai_upper.explore_a.first),
            ),
            (
                "bai_ub_a_second".into(),
                Some(self.bai_upper.explore_a.second),
            ),
            ("bai_ub_b".into(), Some(self.bai_upper.explore_b)),
            (
                "bai_ub_c_first".into(),
                self.bai_upper.explore_c.map(|c| c.first),
            ),
            (
                "bai_ub_c_second".into(),
                self.bai_upper.explore_c.map(|c| c.second),
            ),
            (
                "assumption_arm2_ok".into(),
                Some(if self.assumption_arm2.holds { 1.0 } else { 0.0 }),
            ),
        ]);
        if let Some(r) = &self.regret {
            rows.extend([
                ("budget".into(), self.budget),
                ("epsilon".into(), Some(r.epsilon)),
                ("regret_dep_lb_coeff".into(), Some(r.dep_lb_coeff)),
                ("regret_dep_ub_coeff".into(), Some(r.dep_ub_coeff)),
                ("regret_finite_dep_ub".into(), Some(r.finite_dep_ub)),
                ("regret_indep_ub".into(), r.indep_ub),
            ]);
        }
        rows
    }
}
