use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::ar::ArModel;
use super::history::STEPS_PER_DAY;
use super::DistModelError;
use crate::scalar::Scalar;

/// Affine map from the stacked residuals `w` to the disturbance trajectory,
/// `ξ = offset + gain · w`.
///
/// Both `ξ` and `w` are disturbance-major: entry `i * horizon + t` is
/// disturbance `i` at horizon step `t` (0-based). Step `t` of `ξ` depends
/// on `w` at steps `0..=t` of the same disturbance only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedDisturbanceMap<S> {
    pub horizon: usize,
    pub n_disturbances: usize,
    pub offset: Array1<S>,
    pub gain: Array2<S>,
    pub current_error: Vec<S>,
    /// Hour-of-day of the residual feeding each horizon step.
    pub residual_hours: Vec<usize>,
}

impl<S: Scalar> StackedDisturbanceMap<S> {
    pub fn index(&self, disturbance: usize, step: usize) -> usize {
        disturbance * self.horizon + step
    }

    pub fn apply(&self, w: &[S]) -> Vec<S> {
        let n = self.offset.len();
        assert_eq!(w.len(), n, "residual vector has wrong length");
        (0..n)
            .map(|r| {
                let mut acc = self.offset[r];
                for c in 0..n {
                    let g = self.gain[[r, c]];
                    if g != S::zero() {
                        acc += g * w[c];
                    }
                }
                acc
            })
            .collect()
    }

    /// Disturbance vector at horizon step `step` for residuals `w`.
    pub fn at_step(&self, w: &[S], step: usize) -> Vec<S> {
        let xi = self.apply(w);
        (0..self.n_disturbances)
            .map(|i| xi[self.index(i, step)])
            .collect()
    }
}

/// Unrolls the error recursion over the horizon.
///
/// `current_error[i]` is the last measured error of disturbance `i`, taken
/// at hour-of-day `start_hour`. Horizon step `t` then carries
/// `e_{t} = α_{h(t)} e_{t−1} + w_{t}` with `h(t) = (start_hour + t) mod 24`
/// and `ξ_t = f_t + e_t`.
pub fn stack_disturbance<S: Scalar>(
    models: &[&ArModel<S>],
    forecasts: &[Vec<S>],
    current_error: &[S],
    start_hour: usize,
    horizon: usize,
) -> Result<StackedDisturbanceMap<S>, DistModelError> {
    let nd = models.len();
    if forecasts.len() != nd || current_error.len() != nd {
        return Err(DistModelError::Shape(format!(
            "{} models, {} forecast series, {} current errors",
            nd,
            forecasts.len(),
            current_error.len()
        )));
    }
    if let Some((i, f)) = forecasts.iter().enumerate().find(|(_, f)| f.len() != horizon) {
        return Err(DistModelError::Shape(format!(
            "forecast {i} has {} steps, horizon is {horizon}",
            f.len()
        )));
    }
    let residual_hours: Vec<usize> = (0..horizon)
        .map(|t| (start_hour + t) % STEPS_PER_DAY)
        .collect();
    let dim = nd * horizon;
    let mut offset = Array1::from_elem(dim, S::zero());
    let mut gain = Array2::from_elem((dim, dim), S::zero());
    for (i, model) in models.iter().enumerate() {
        let a: Vec<S> = residual_hours.iter().map(|h| model.alpha[*h]).collect();
        let base = i * horizon;
        let mut carry = current_error[i];
        for t in 0..horizon {
            carry = a[t] * carry;
            offset[base + t] = forecasts[i][t] + carry;
            let mut coef = S::one();
            for s in (0..=t).rev() {
                gain[[base + t, base + s]] = coef;
                if s > 0 {
                    coef = coef * a[s];
                }
            }
        }
    }
    Ok(StackedDisturbanceMap {
        horizon,
        n_disturbances: nd,
        offset,
        gain,
        current_error: current_error.to_vec(),
        residual_hours,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model_with_alpha(a: f64) -> ArModel<f64> {
        ArModel {
            alpha: vec![a; 24],
            residuals: vec![vec![0.0; 3]; 24],
            mean_hat: vec![0.0; 24],
            var_hat: vec![0.0; 24],
            zero_energy: vec![false; 24],
        }
    }

    #[test]
    fn half_decay_from_unit_error() {
        let m = model_with_alpha(0.5);
        let map = stack_disturbance(&[&m], &[vec![0.0; 3]], &[1.0], 7, 3).unwrap();
        let xi = map.apply(&[0.0; 3]);
        assert_eq!(xi, vec![0.5, 0.25, 0.125]);
    }

    #[test]
    fn memoryless_model_has_identity_gain() {
        let m = model_with_alpha(0.0);
        let f = vec![vec![1.0, 2.0, 3.0, 4.0]];
        let map = stack_disturbance(&[&m], &f, &[5.0], 0, 4).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(map.gain[[r, c]], if r == c { 1.0 } else { 0.0 });
            }
        }
        assert_eq!(map.offset.to_vec(), f[0]);
    }

    #[test]
    fn zero_noise_and_error_reproduces_forecast() {
        let m = model_with_alpha(0.9);
        let f = vec![vec![3.0, -1.0], vec![0.2, 0.4]];
        let map = stack_disturbance(&[&m, &m], &f, &[0.0, 0.0], 22, 2).unwrap();
        assert_eq!(map.apply(&[0.0; 4]), vec![3.0, -1.0, 0.2, 0.4]);
        assert_eq!(map.residual_hours, vec![22, 23]);
    }

    #[test]
    fn block_diagonal_lower_triangular() {
        let m1 = model_with_alpha(0.3);
        let m2 = model_with_alpha(-0.7);
        let f = vec![vec![0.0; 5]; 2];
        let map = stack_disturbance(&[&m1, &m2], &f, &[1.0, -2.0], 3, 5).unwrap();
        for r in 0..10 {
            for c in 0..10 {
                let same_block = r / 5 == c / 5;
                if !same_block || c % 5 > r % 5 {
                    assert_eq!(map.gain[[r, c]], 0.0, "({r},{c})");
                }
            }
        }
    }

    #[test]
    fn shape_errors() {
        let m = model_with_alpha(0.5);
        assert!(stack_disturbance(&[&m], &[vec![0.0; 2]], &[0.0], 0, 3).is_err());
        assert!(stack_disturbance(&[&m], &[vec![0.0; 3]], &[], 0, 3).is_err());
    }
}
