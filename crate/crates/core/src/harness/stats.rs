use serde::Serialize;
use tracing::warn;

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (`n - 1` denominator); `0` for a single value.
pub fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `(budget, mean regret)` points used by the fit.
    pub points: Vec<(f64, f64)>,
    /// Budgets dropped because their mean regret was not positive.
    pub excluded: Vec<f64>,
}

/// Least-squares fit of `ln(regret) = slope * ln(budget) + intercept`.
///
/// Points with non-positive regret are dropped with a warning. At least three
/// distinct budgets must remain.
pub fn fit_scaling_slope(points: &[(f64, f64)]) -> Result<ScalingFit> {
    let mut used = Vec::new();
    let mut excluded = Vec::new();
    for &(budget, regret) in points {
        if regret > 0.0 && budget > 0.0 {
            used.push((budget, regret));
        } else {
            warn!(
                budget,
                regret, "excluding grid point with non-positive mean regret"
            );
            excluded.push(budget);
        }
    }
    let mut distinct: Vec<f64> = used.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Parameter(format!(
            "scaling fit needs 3 distinct budgets with positive regret, got {}",
            distinct.len()
        )));
    }

    let xs: Vec<f64> = used.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = used.iter().map(|p| p.1.ln()).collect();
    let (mx, my) = (mean(&xs), mean(&ys));
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(ScalingFit {
        slope,
        intercept,
        r_squared,
        points: used,
        excluded,
    })
}
