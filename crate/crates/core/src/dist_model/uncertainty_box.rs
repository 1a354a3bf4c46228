use serde::{Deserialize, Serialize};

use super::ambiguity::AmbiguityBounds;
use super::quantile::normal_quantile;
use super::DistModelError;
use crate::scalar::Scalar;

/// Per-coordinate violation budgets `(β̲, β̄)` over the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaAllocation<S> {
    /// `β̲ = β̄ = ε / (2 |T| |D|)` everywhere.
    Uniform,
    /// Explicit budgets in coordinate order; must sum to `ε`.
    Custom { beta_lo: Vec<S>, beta_hi: Vec<S> },
}

/// Axis-aligned box `Ŵ` on the stacked residual vector.
///
/// Coordinates are disturbance-major: coordinate `i * horizon + t` is
/// disturbance `i` at horizon step `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyBox<S> {
    pub horizon: usize,
    pub n_disturbances: usize,
    pub lower: Vec<S>,
    pub upper: Vec<S>,
    pub beta_lo: Vec<S>,
    pub beta_hi: Vec<S>,
}

impl<S: Scalar> UncertaintyBox<S> {
    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn index(&self, disturbance: usize, step: usize) -> usize {
        disturbance * self.horizon + step
    }

    pub fn center(&self) -> Vec<S> {
        let half = S::lit(0.5);
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| (*l + *u) * half)
            .collect()
    }

    pub fn radius(&self) -> Vec<S> {
        let half = S::lit(0.5);
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| (*u - *l) * half)
            .collect()
    }

    pub fn contains(&self, w: &[S]) -> bool {
        w.len() == self.dim()
            && w
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (l, u))| *l <= *x && *x <= *u)
    }

    /// Collapses every coordinate to its center (certainty equivalence).
    pub fn to_point(&self) -> Self {
        let c = self.center();
        Self {
            lower: c.clone(),
            upper: c,
            ..self.clone()
        }
    }
}

/// Box on the residual means, `[μ̲, μ̄]` per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanBox<S> {
    pub lower: Vec<S>,
    pub upper: Vec<S>,
}

impl<S: Scalar> MeanBox<S> {
    pub fn from_bounds(bounds: &[AmbiguityBounds<S>]) -> Self {
        Self {
            lower: bounds.iter().map(|b| b.mu_lo).collect(),
            upper: bounds.iter().map(|b| b.mu_hi).collect(),
        }
    }

    pub fn to_point(&self) -> Self {
        let half = S::lit(0.5);
        let c: Vec<S> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| (*l + *u) * half)
            .collect();
        Self {
            lower: c.clone(),
            upper: c,
        }
    }
}

/// Builds `Ŵ` from per-coordinate ambiguity bounds (coordinate order as in
/// [`UncertaintyBox`]) so that every member of the ambiguity family puts at
/// least `1 − ε` of its mass inside the box.
pub fn build_box<S: Scalar>(
    bounds: &[AmbiguityBounds<S>],
    allocation: &BetaAllocation<S>,
    epsilon: S,
    horizon: usize,
    n_disturbances: usize,
) -> Result<UncertaintyBox<S>, DistModelError> {
    if !(epsilon > S::zero() && epsilon < S::one()) {
        return Err(DistModelError::Domain(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let dim = horizon * n_disturbances;
    if bounds.len() != dim || dim == 0 {
        return Err(DistModelError::Shape(format!(
            "expected {dim} bounds, got {}",
            bounds.len()
        )));
    }
    let (beta_lo, beta_hi) = match allocation {
        BetaAllocation::Uniform => {
            let b = epsilon / (S::lit(2.0) * S::of_usize(dim));
            (vec![b; dim], vec![b; dim])
        }
        BetaAllocation::Custom { beta_lo, beta_hi } => {
            if beta_lo.len() != dim || beta_hi.len() != dim {
                return Err(DistModelError::Shape(format!(
                    "beta allocation needs {dim} entries per side"
                )));
            }
            if beta_lo.iter().chain(beta_hi).any(|b| !(*b > S::zero() && *b < S::one())) {
                return Err(DistModelError::Domain("every beta must lie in (0, 1)".into()));
            }
            let total: S = beta_lo.iter().chain(beta_hi).copied().sum();
            if (total - epsilon).abs() > S::lit(1e-12).max(S::epsilon() * S::lit(8.0)) {
                return Err(DistModelError::Domain(format!(
                    "beta allocation sums to {total}, expected {epsilon}"
                )));
            }
            (beta_lo.clone(), beta_hi.clone())
        }
    };
    let mut lower = Vec::with_capacity(dim);
    let mut upper = Vec::with_capacity(dim);
    for (j, b) in bounds.iter().enumerate() {
        let sigma = b.sigma_hi();
        if sigma == S::zero() {
            lower.push(b.mu_lo);
            upper.push(b.mu_hi);
            continue;
        }
        let z_lo = normal_quantile(S::one() - beta_lo[j])?;
        let z_hi = normal_quantile(S::one() - beta_hi[j])?;
        lower.push(b.mu_lo - z_lo * sigma);
        upper.push(b.mu_hi + z_hi * sigma);
    }
    Ok(UncertaintyBox {
        horizon,
        n_disturbances,
        lower,
        upper,
        beta_lo,
        beta_hi,
    })
}
