//! Distribution functions and their inverses.
//!
//! Quantiles are found by monotone bracketing followed by safeguarded
//! Newton/bisection on the CDF, so every quantile is consistent with the
//! CDF exported next to it.

use super::special::{beta_inc, gamma_p, gamma_q, ln_gamma};
use super::DistModelError;
use crate::scalar::Scalar;

fn check_prob<S: Scalar>(p: S) -> Result<(), DistModelError> {
    if p > S::zero() && p < S::one() {
        Ok(())
    } else {
        Err(DistModelError::Domain(format!(
            "probability must lie in (0, 1), got {}",
            p
        )))
    }
}

fn check_dof(dof: u32) -> Result<(), DistModelError> {
    if dof == 0 {
        Err(DistModelError::Domain("degrees of freedom must be ≥ 1".into()))
    } else {
        Ok(())
    }
}

/// Standard normal CDF.
pub fn normal_cdf<S: Scalar>(x: S) -> S {
    let half = S::lit(0.5);
    let z = x * x * half;
    if x < S::zero() {
        half * gamma_q(half, z)
    } else {
        half + half * gamma_p(half, z)
    }
}

pub fn normal_pdf<S: Scalar>(x: S) -> S {
    (-x * x * S::lit(0.5)).exp() / (S::lit(2.0) * S::PI()).sqrt()
}

/// Chi-square CDF with `dof` degrees of freedom.
pub fn chi2_cdf<S: Scalar>(x: S, dof: u32) -> S {
    if x <= S::zero() {
        return S::zero();
    }
    gamma_p(S::from_u32(dof).unwrap() * S::lit(0.5), x * S::lit(0.5))
}

pub fn chi2_pdf<S: Scalar>(x: S, dof: u32) -> S {
    if x <= S::zero() {
        return S::zero();
    }
    let k = S::from_u32(dof).unwrap() * S::lit(0.5);
    ((k - S::one()) * x.ln() - x * S::lit(0.5) - k * S::lit(2.0).ln() - ln_gamma(k)).exp()
}

/// Student t CDF with `dof` degrees of freedom.
pub fn student_t_cdf<S: Scalar>(t: S, dof: u32) -> S {
    let nu = S::from_u32(dof).unwrap();
    let half = S::lit(0.5);
    let x = nu / (nu + t * t);
    let tail = half * beta_inc(nu * half, half, x);
    if t >= S::zero() {
        S::one() - tail
    } else {
        tail
    }
}

pub fn student_t_pdf<S: Scalar>(t: S, dof: u32) -> S {
    let nu = S::from_u32(dof).unwrap();
    let half = S::lit(0.5);
    let ln_c = ln_gamma((nu + S::one()) * half) - ln_gamma(nu * half) - half * (nu * S::PI()).ln();
    (ln_c - (nu + S::one()) * half * (S::one() + t * t / nu).ln()).exp()
}

/// Inverts a continuous increasing CDF on `[lo, ∞)` starting from a
/// bracket `[lo, hi]` that is widened until it contains `p`.
fn invert<S: Scalar>(
    p: S,
    mut lo: S,
    mut hi: S,
    cdf: impl Fn(S) -> S,
    pdf: impl Fn(S) -> S,
) -> S {
    let two = S::lit(2.0);
    let mut widen = 0;
    while cdf(hi) < p {
        lo = hi;
        hi = hi * two + S::one();
        widen += 1;
        if widen > 2000 {
            return S::infinity();
        }
    }
    let mut x = (lo + hi) / two;
    for _ in 0..400 {
        let f = cdf(x) - p;
        if f == S::zero() {
            return x;
        }
        if f < S::zero() {
            lo = x;
        } else {
            hi = x;
        }
        let width_tol = S::epsilon() * S::lit(4.0) * (S::one() + x.abs());
        if hi - lo <= width_tol {
            break;
        }
        let d = pdf(x);
        let newton = if d > S::zero() { x - f / d } else { S::nan() };
        x = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) / two
        };
    }
    x
}

/// Standard normal quantile `Φ⁻¹(p)`.
pub fn normal_quantile<S: Scalar>(p: S) -> Result<S, DistModelError> {
    check_prob(p)?;
    let half = S::lit(0.5);
    if p < half {
        return Ok(-normal_quantile(S::one() - p)?);
    }
    if p == half {
        return Ok(S::zero());
    }
    Ok(invert(p, S::zero(), S::lit(4.0), normal_cdf, normal_pdf))
}

/// Chi-square quantile with `dof` degrees of freedom.
pub fn chi2_quantile<S: Scalar>(p: S, dof: u32) -> Result<S, DistModelError> {
    check_prob(p)?;
    check_dof(dof)?;
    let start = S::from_u32(dof).unwrap() + S::one();
    Ok(invert(
        p,
        S::zero(),
        start,
        |x| chi2_cdf(x, dof),
        |x| chi2_pdf(x, dof),
    ))
}

/// Student t quantile with `dof` degrees of freedom.
pub fn student_t_quantile<S: Scalar>(p: S, dof: u32) -> Result<S, DistModelError> {
    check_prob(p)?;
    check_dof(dof)?;
    let half = S::lit(0.5);
    if p < half {
        return Ok(-student_t_quantile(S::one() - p, dof)?);
    }
    if p == half {
        return Ok(S::zero());
    }
    Ok(invert(
        p,
        S::zero(),
        S::lit(2.0),
        |t| student_t_cdf(t, dof),
        |t| student_t_pdf(t, dof),
    ))
}
