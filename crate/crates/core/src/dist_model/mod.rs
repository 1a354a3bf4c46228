//! Data-driven disturbance models.
//!
//! Historical forecast/realization pairs are turned into hour-of-day AR(1)
//! error models, Gaussian ambiguity sets with a stated confidence, a
//! hyperrectangle that holds `1 − ε` of the mass of every member of the
//! ambiguity set, and the affine map from residuals to disturbance
//! trajectories over a prediction horizon.

mod ambiguity;
mod ar;
mod correlation;
mod history;
pub mod quantile;
pub mod special;
mod stack;
mod uncertainty_box;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ambiguity::{ambiguity_bounds, bounds_from_stats, AmbiguityBounds};
pub use ar::{fit_ar, ls_objective, mean_and_variance, ArModel};
pub use correlation::pearson_correlation;
pub use history::{DisturbanceHistory, STEPS_PER_DAY};
pub use quantile::{
    chi2_cdf, chi2_quantile, normal_cdf, normal_quantile, student_t_cdf, student_t_quantile,
};
pub use stack::{stack_disturbance, StackedDisturbanceMap};
pub use uncertainty_box::{build_box, BetaAllocation, MeanBox, UncertaintyBox};

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistModelError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid history: {0}")]
    InvalidHistory(String),
    #[error("need at least 3 samples, got {samples}")]
    InsufficientData { samples: usize },
    #[error("sample variance is zero")]
    DegenerateVariance,
    #[error("{source_name}:{line}: {message}")]
    Csv {
        source_name: String,
        line: u64,
        message: String,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

/// Everything learned about one disturbance source: the AR model, the
/// hourly ambiguity bounds, and the hourly box interval for a uniform
/// violation budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguitySpec<S> {
    pub disturbance_id: String,
    pub days: usize,
    pub model: ArModel<S>,
    pub bounds: Vec<AmbiguityBounds<S>>,
    pub epsilon: S,
    pub horizon: usize,
    pub n_disturbances: usize,
    pub box_lower: Vec<S>,
    pub box_upper: Vec<S>,
}

impl<S: Scalar> AmbiguitySpec<S> {
    /// Fits the model and precomputes hourly bounds and box intervals for
    /// the uniform allocation `β = ε / (2 · horizon · n_disturbances)`.
    pub fn fit(
        history: &DisturbanceHistory<S>,
        delta_chi: S,
        delta_st: S,
        epsilon: S,
        horizon: usize,
        n_disturbances: usize,
    ) -> Result<Self, DistModelError> {
        history.validate()?;
        let model = fit_ar(history);
        let bounds = (0..STEPS_PER_DAY)
            .map(|h| ambiguity_bounds(&model, h, delta_chi, delta_st))
            .collect::<Result<Vec<_>, _>>()?;
        let mut spec = Self {
            disturbance_id: history.disturbance_id.clone(),
            days: history.days(),
            model,
            bounds,
            epsilon,
            horizon,
            n_disturbances,
            box_lower: Vec::new(),
            box_upper: Vec::new(),
        };
        let z = normal_quantile(S::one() - spec.uniform_beta())?;
        for b in &spec.bounds {
            let sigma = b.sigma_hi();
            spec.box_lower.push(b.mu_lo - z * sigma);
            spec.box_upper.push(b.mu_hi + z * sigma);
        }
        Ok(spec)
    }

    pub fn uniform_beta(&self) -> S {
        self.epsilon / (S::lit(2.0) * S::of_usize(self.horizon * self.n_disturbances))
    }

    pub fn to_json(&self) -> serde_json::Result<String>
    where
        S: Serialize,
    {
        serde_json::to_string_pretty(self)
    }
}
