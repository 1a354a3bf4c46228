use serde::{Deserialize, Serialize};

use super::history::{DisturbanceHistory, STEPS_PER_DAY};
use crate::scalar::Scalar;

/// Hour-of-day AR(1) model of the forecast error, `e_{t+1} = α_t e_t + w_t`.
///
/// All vectors are indexed by hour-of-day `t ∈ 0..24`; `alpha[t]` maps the
/// error at hour `t` to hour `t + 1` (hour 23 wraps to hour 0 of the next day).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArModel<S> {
    pub alpha: Vec<S>,
    pub residuals: Vec<Vec<S>>,
    pub mean_hat: Vec<S>,
    pub var_hat: Vec<S>,
    /// Hours whose regressor had zero energy; `alpha` was set to 0 there.
    pub zero_energy: Vec<bool>,
}

impl<S: Scalar> ArModel<S> {
    pub fn samples(&self, hour: usize) -> usize {
        self.residuals[hour].len()
    }

    pub fn has_zero_energy_hours(&self) -> bool {
        self.zero_energy.iter().any(|z| *z)
    }
}

/// Sample mean and unbiased (N−1) variance.
pub fn mean_and_variance<S: Scalar>(xs: &[S]) -> (S, S) {
    if xs.is_empty() {
        return (S::zero(), S::zero());
    }
    let n = S::of_usize(xs.len());
    let mean = xs.iter().copied().sum::<S>() / n;
    if xs.len() < 2 {
        return (mean, S::zero());
    }
    let ss = xs.iter().map(|x| (*x - mean) * (*x - mean)).sum::<S>();
    (mean, ss / (n - S::one()))
}

/// Least-squares fit of the hourly AR coefficients and residual statistics.
pub fn fit_ar<S: Scalar>(history: &DisturbanceHistory<S>) -> ArModel<S> {
    let e = history.errors();
    let n = e.len();
    let mut alpha = vec![S::zero(); STEPS_PER_DAY];
    let mut residuals = vec![Vec::new(); STEPS_PER_DAY];
    let mut mean_hat = vec![S::zero(); STEPS_PER_DAY];
    let mut var_hat = vec![S::zero(); STEPS_PER_DAY];
    let mut zero_energy = vec![false; STEPS_PER_DAY];

    for t in 0..STEPS_PER_DAY {
        let pairs: Vec<(S, S)> = if t + 1 < STEPS_PER_DAY {
            (0..n).map(|k| (e[k][t], e[k][t + 1])).collect()
        } else {
            (0..n - 1).map(|k| (e[k][t], e[k + 1][0])).collect()
        };
        let energy: S = pairs.iter().map(|(x, _)| *x * *x).sum();
        let cross: S = pairs.iter().map(|(x, y)| *x * *y).sum();
        let a = if energy > S::zero() {
            cross / energy
        } else {
            zero_energy[t] = true;
            S::zero()
        };
        let w: Vec<S> = pairs.iter().map(|(x, y)| *y - a * *x).collect();
        let (m, v) = mean_and_variance(&w);
        alpha[t] = a;
        mean_hat[t] = m;
        var_hat[t] = v;
        residuals[t] = w;
    }

    ArModel {
        alpha,
        residuals,
        mean_hat,
        var_hat,
        zero_energy,
    }
}

/// Sum of squared one-step prediction errors for a given `alpha` at `hour`.
pub fn ls_objective<S: Scalar>(history: &DisturbanceHistory<S>, hour: usize, alpha: S) -> S {
    let e = history.errors();
    let n = e.len();
    if hour + 1 < STEPS_PER_DAY {
        (0..n)
            .map(|k| {
                let r = e[k][hour + 1] - alpha * e[k][hour];
                r * r
            })
            .sum()
    } else {
        (0..n - 1)
            .map(|k| {
                let r = e[k + 1][0] - alpha * e[k][hour];
                r * r
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn history_from_errors(errs: Vec<Vec<f64>>) -> DisturbanceHistory<f64> {
        let f = vec![vec![10.0; 24]; errs.len()];
        let r = errs
            .iter()
            .map(|d| d.iter().map(|e| 10.0 + e).collect())
            .collect();
        DisturbanceHistory::new("x", f, r).unwrap()
    }

    #[test]
    fn hand_evaluated_closed_form() {
        // hour1 errors (1,2,0), hour2 errors (0.5,1.0,0): third day is inert
        let mut errs = vec![vec![0.0; 24]; 3];
        errs[0][0] = 1.0;
        errs[1][0] = 2.0;
        errs[0][1] = 0.5;
        errs[1][1] = 1.0;
        let m = fit_ar(&history_from_errors(errs));
        assert!((m.alpha[0] - 0.5).abs() < 1e-15);
        assert!(m.residuals[0].iter().all(|w| w.abs() < 1e-15));
    }

    #[test]
    fn zero_error_history_flags_every_hour() {
        let m = fit_ar(&history_from_errors(vec![vec![0.0; 24]; 5]));
        assert!(m.zero_energy.iter().all(|z| *z));
        assert!(m.alpha.iter().all(|a| *a == 0.0));
        assert!(m.residuals.iter().flatten().all(|w| *w == 0.0));
    }

    #[test]
    fn exact_ar_data_recovers_coefficient() {
        let days = 6;
        let mut errs = vec![vec![0.0; 24]; days];
        for (k, d) in errs.iter_mut().enumerate() {
            d[3] = 1.0 + k as f64;
            d[4] = 0.8 * d[3];
        }
        let m = fit_ar(&history_from_errors(errs));
        assert!((m.alpha[3] - 0.8).abs() < 1e-14);
        assert!(m.var_hat[3].abs() < 1e-28);
    }

    #[test]
    fn last_hour_wraps_into_next_day() {
        let mut errs = vec![vec![0.0; 24]; 4];
        for k in 0..4 {
            errs[k][23] = 1.0 + k as f64;
            errs[k][0] = if k > 0 { 0.5 * (k as f64) } else { 9.0 };
        }
        let m = fit_ar(&history_from_errors(errs));
        assert_eq!(m.samples(23), 3);
        assert_eq!(m.samples(0), 4);
        assert!((m.alpha[23] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn unbiased_variance() {
        let (m, v) = mean_and_variance(&[1.0_f64, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((v - 5.0 / 3.0).abs() < 1e-15);
    }
}
