use crate::gaps::{argmax_first, gap_against, PriorMeans};
use crate::instance::Instance;

/// Confidence radius `sqrt(ln(L t^4 / delta) / n)`.
///
/// Returns `+inf` for `n = 0`, and `0` when the log term is not positive.
pub fn confidence_radius(n: u64, round: u64, delta: f64, factor: f64) -> f64 {
    radius_from_log(n, log_term(round, delta, factor))
}

/// `ln(L t^4 / delta)`, computed in log space.
#[inline]
pub(crate) fn log_term(round: u64, delta: f64, factor: f64) -> f64 {
    (factor / delta).ln() + 4.0 * (round as f64).ln()
}

#[inline]
pub(crate) fn radius_from_log(n: u64, log_term: f64) -> f64 {
    if n == 0 {
        f64::INFINITY
    } else if log_term <= 0.0 {
        0.0
    } else {
        (log_term / n as f64).sqrt()
    }
}

/// Bookkeeping of a best-arm identification run.
///
/// Statistics are stored per (arm, fidelity) cell as pull counts and reward
/// sums; empirical means are derived on demand.
#[derive(Clone, Debug, PartialEq)]
pub struct BaiRunState {
    num_arms: usize,
    num_fidelities: usize,
    counts: Vec<u64>,
    sums: Vec<f64>,
    arm_totals: Vec<u64>,
    /// Committed fidelity per arm (Explore-B).
    committed: Vec<Option<usize>>,
    round: u64,
    leader: usize,
    challenger: usize,
}

impl BaiRunState {
    pub fn new(num_arms: usize, num_fidelities: usize) -> Self {
        Self {
            num_arms,
            num_fidelities,
            counts: vec![0; num_arms * num_fidelities],
            sums: vec![0.0; num_arms * num_fidelities],
            arm_totals: vec![0; num_arms],
            committed: vec![None; num_arms],
            round: 1,
            leader: 0,
            challenger: 1.min(num_arms.saturating_sub(1)),
        }
    }

    pub fn for_instance(inst: &Instance) -> Self {
        Self::new(inst.num_arms(), inst.num_fidelities())
    }

    #[inline]
    fn cell(&self, arm: usize, fidelity: usize) -> usize {
        arm * self.num_fidelities + fidelity
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    pub fn num_fidelities(&self) -> usize {
        self.num_fidelities
    }

    pub fn record(&mut self, arm: usize, fidelity: usize, observation: f64) {
        let c = self.cell(arm, fidelity);
        self.counts[c] += 1;
        self.sums[c] += observation;
        self.arm_totals[arm] += 1;
    }

    pub fn count(&self, arm: usize, fidelity: usize) -> u64 {
        self.counts[self.cell(arm, fidelity)]
    }

    /// Total pulls of `arm` across fidelities.
    pub fn arm_total(&self, arm: usize) -> u64 {
        self.arm_totals[arm]
    }

    /// Empirical mean, `0` for an unpulled cell.
    pub fn mean(&self, arm: usize, fidelity: usize) -> f64 {
        let c = self.cell(arm, fidelity);
        if self.counts[c] == 0 {
            0.0
        } else {
            self.sums[c] / self.counts[c] as f64
        }
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn set_round(&mut self, round: u64) {
        self.round = round;
    }

    pub fn leader(&self) -> usize {
        self.leader
    }

    pub fn challenger(&self) -> usize {
        self.challenger
    }

    pub fn set_critical(&mut self, leader: usize, challenger: usize) {
        self.leader = leader;
        self.challenger = challenger;
    }

    pub fn committed(&self, arm: usize) -> Option<usize> {
        self.committed[arm]
    }

    pub(crate) fn commit(&mut self, arm: usize, fidelity: usize) {
        self.committed[arm] = Some(fidelity);
    }

    /// Counts of one arm, indexed by fidelity.
    pub fn arm_counts(&self, arm: usize) -> &[u64] {
        let start = arm * self.num_fidelities;
        &self.counts[start..start + self.num_fidelities]
    }

    /// Counts indexed `[arm][fidelity]`.
    pub fn count_matrix(&self) -> Vec<Vec<u64>> {
        (0..self.num_arms)
            .map(|k| self.arm_counts(k).to_vec())
            .collect()
    }

    /// Upper and lower confidence bounds on `arm`'s true mean at the current
    /// round: the tightest of the per-fidelity bounds
    /// `mean(m) +- (zeta(m) + radius(m))`. Unpulled fidelities are skipped;
    /// an unpulled arm gets `(1, 0)`.
    pub fn ucb_lcb(&self, inst: &Instance, delta: f64, factor: f64, arm: usize) -> (f64, f64) {
        self.ucb_lcb_with_log(inst, log_term(self.round, delta, factor), arm)
    }

    pub(crate) fn ucb_lcb_with_log(
        &self,
        inst: &Instance,
        log_term: f64,
        arm: usize,
    ) -> (f64, f64) {
        if self.arm_totals[arm] == 0 {
            return (1.0, 0.0);
        }
        let mut ucb = f64::INFINITY;
        let mut lcb = f64::NEG_INFINITY;
        for m in 0..self.num_fidelities {
            let n = self.count(arm, m);
            if n == 0 {
                continue;
            }
            let mean = self.mean(arm, m);
            let width = inst.error_bound(m) + radius_from_log(n, log_term);
            ucb = ucb.min(mean + width);
            lcb = lcb.max(mean - width);
        }
        (ucb, lcb)
    }

    /// Estimated gap of `arm` at `fidelity`, taking `leader` as the presumed
    /// best arm and the prior proxies for the unknown top-two means.
    pub fn estimated_gap(
        &self,
        inst: &Instance,
        prior: &PriorMeans,
        leader: usize,
        arm: usize,
        fidelity: usize,
    ) -> f64 {
        gap_against(
            arm == leader,
            self.mean(arm, fidelity),
            inst.error_bound(fidelity),
            prior.mu1_tilde,
            prior.mu2_tilde,
        )
    }
}

/// Top two arms by upper confidence bound, lowest index on ties.
pub fn select_critical_arms(ucbs: &[f64]) -> (usize, usize) {
    let leader = argmax_first(ucbs.iter().copied()).expect("at least two arms");
    let challenger =
        argmax_first(
            ucbs.iter()
                .enumerate()
                .map(|(k, &u)| if k == leader { f64::NEG_INFINITY } else { u }),
        )
        .expect("at least two arms");
    debug_assert_ne!(leader, challenger);
    (leader, challenger)
}
