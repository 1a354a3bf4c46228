use serde::{Deserialize, Serialize};

use super::ar::ArModel;
use super::quantile::{chi2_quantile, student_t_quantile};
use super::DistModelError;
use crate::scalar::Scalar;

/// Confidence box on the residual mean and variance at one hour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityBounds<S> {
    pub mu_lo: S,
    pub mu_hi: S,
    pub var_lo: S,
    pub var_hi: S,
    pub delta_chi: S,
    pub delta_st: S,
    pub mean_hat: S,
    /// Set when the sample variance was zero and the bounds collapsed.
    pub degenerate: bool,
}

impl<S: Scalar> AmbiguityBounds<S> {
    /// A point bound at `mean` with zero variance.
    pub fn point(mean: S, delta_chi: S, delta_st: S) -> Self {
        Self {
            mu_lo: mean,
            mu_hi: mean,
            var_lo: S::zero(),
            var_hi: S::zero(),
            delta_chi,
            delta_st,
            mean_hat: mean,
            degenerate: true,
        }
    }

    /// `δ = δ^χ + δ^st`, the miss probability of the joint bound.
    pub fn confidence_gap(&self) -> S {
        self.delta_chi + self.delta_st
    }

    pub fn sigma_hi(&self) -> S {
        self.var_hi.sqrt()
    }

    pub fn contains(&self, mu: S, var: S) -> bool {
        self.mu_lo <= mu && mu <= self.mu_hi && self.var_lo <= var && var <= self.var_hi
    }
}

fn check_delta<S: Scalar>(name: &str, d: S) -> Result<(), DistModelError> {
    if d > S::zero() && d < S::one() {
        Ok(())
    } else {
        Err(DistModelError::Domain(format!("{name} must lie in (0, 1), got {d}")))
    }
}

/// Mean/variance bounds from the sample statistics of `n` residuals.
///
/// The variance interval uses chi-square quantiles at `δ^χ/2` and
/// `1 − δ^χ/2` with `n − 1` degrees of freedom, the larger quantile going
/// into the lower bound so that `var_lo ≤ var_hat ≤ var_hi`. The mean
/// interval is the two-sided Student t interval at level `1 − δ^st`.
pub fn bounds_from_stats<S: Scalar>(
    n: usize,
    mean_hat: S,
    var_hat: S,
    delta_chi: S,
    delta_st: S,
) -> Result<AmbiguityBounds<S>, DistModelError> {
    check_delta("delta_chi", delta_chi)?;
    check_delta("delta_st", delta_st)?;
    if delta_chi + delta_st >= S::one() {
        return Err(DistModelError::Domain(
            "delta_chi + delta_st must be below 1".into(),
        ));
    }
    if n < 3 {
        return Err(DistModelError::InsufficientData { samples: n });
    }
    if var_hat <= S::zero() {
        return Ok(AmbiguityBounds::point(mean_hat, delta_chi, delta_st));
    }
    let dof = (n - 1) as u32;
    let half = S::lit(0.5);
    let nm1 = S::of_usize(n - 1);
    let q_lo = chi2_quantile(delta_chi * half, dof)?;
    let q_hi = chi2_quantile(S::one() - delta_chi * half, dof)?;
    let var_lo = nm1 * var_hat / q_hi;
    let var_hi = nm1 * var_hat / q_lo;
    let t = student_t_quantile(S::one() - delta_st * half, dof)?;
    let half_width = t * (var_hat / S::of_usize(n)).sqrt();
    Ok(AmbiguityBounds {
        mu_lo: mean_hat - half_width,
        mu_hi: mean_hat + half_width,
        var_lo,
        var_hi,
        delta_chi,
        delta_st,
        mean_hat,
        degenerate: false,
    })
}

/// Ambiguity bounds for hour-of-day `hour` of a fitted model.
pub fn ambiguity_bounds<S: Scalar>(
    model: &ArModel<S>,
    hour: usize,
    delta_chi: S,
    delta_st: S,
) -> Result<AmbiguityBounds<S>, DistModelError> {
    if hour >= model.alpha.len() {
        return Err(DistModelError::Shape(format!("hour {hour} out of range")));
    }
    bounds_from_stats(
        model.samples(hour),
        model.mean_hat[hour],
        model.var_hat[hour],
        delta_chi,
        delta_st,
    )
}
