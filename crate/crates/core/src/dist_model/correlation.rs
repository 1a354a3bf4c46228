use super::DistModelError;
use crate::scalar::Scalar;

/// Sample Pearson correlation coefficient.
pub fn pearson_correlation<S: Scalar>(x: &[S], y: &[S]) -> Result<S, DistModelError> {
    if x.len() != y.len() {
        return Err(DistModelError::Shape(format!(
            "samples have lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(DistModelError::InsufficientData { samples: x.len() });
    }
    let n = S::of_usize(x.len());
    let mx = x.iter().copied().sum::<S>() / n;
    let my = y.iter().copied().sum::<S>() / n;
    let (mut sxy, mut sxx, mut syy) = (S::zero(), S::zero(), S::zero());
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (*a - mx, *b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == S::zero() || syy == S::zero() {
        return Err(DistModelError::DegenerateVariance);
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Ok(r.max(-S::one()).min(S::one()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_anti_correlation() {
        let x = [1.0_f64, 2.5, -3.0, 4.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson_correlation(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson_correlation(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn hand_formula() {
        // mx = 2, my = 13/3; sxy = 5, sxx = 2, syy = 38/3
        let r = pearson_correlation(&[1.0_f64, 2.0, 3.0], &[2.0, 4.0, 7.0]).unwrap();
        let expected = 5.0 / (2.0f64.sqrt() * (38.0f64 / 3.0).sqrt());
        assert!((r - expected).abs() < 1e-14);
        assert!((r - 0.9934).abs() < 1e-4);
    }

    #[test]
    fn constant_sample_is_degenerate() {
        assert!(matches!(
            pearson_correlation(&[1.0_f64, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(DistModelError::DegenerateVariance)
        ));
    }
}
