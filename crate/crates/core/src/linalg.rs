//! Dense helpers on top of `ndarray` that stay generic in the scalar.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::scalar::Scalar;

pub fn matvec<S: Scalar>(a: ArrayView2<'_, S>, x: ArrayView1<'_, S>) -> Array1<S> {
    let (m, n) = a.dim();
    assert_eq!(n, x.len(), "matvec shape mismatch");
    let mut y = Array1::from_elem(m, S::zero());
    for i in 0..m {
        let mut acc = S::zero();
        for j in 0..n {
            acc += a[[i, j]] * x[j];
        }
        y[i] = acc;
    }
    y
}

pub fn matmul<S: Scalar>(a: ArrayView2<'_, S>, b: ArrayView2<'_, S>) -> Array2<S> {
    let (m, k) = a.dim();
    let (k2, n) = b.dim();
    assert_eq!(k, k2, "matmul shape mismatch");
    let mut c = Array2::from_elem((m, n), S::zero());
    for i in 0..m {
        for l in 0..k {
            let ail = a[[i, l]];
            if ail == S::zero() {
                continue;
            }
            for j in 0..n {
                c[[i, j]] += ail * b[[l, j]];
            }
        }
    }
    c
}

fn inf_norm<S: Scalar>(a: ArrayView2<'_, S>) -> S {
    a.rows()
        .into_iter()
        .map(|r| r.iter().fold(S::zero(), |acc, v| acc + v.abs()))
        .fold(S::zero(), S::max)
}

/// Matrix exponential and its integral `∫₀¹ e^{Ms} ds` for a square `M`,
/// both by scaling and squaring of the augmented block matrix
/// `[[M, I], [0, 0]]`.
///
/// Returns `(e^M, ∫₀¹ e^{Ms} ds)`, i.e. the zero-order-hold transition and
/// input integrator for a unit step.
pub fn expm_with_integral<S: Scalar>(m: ArrayView2<'_, S>) -> (Array2<S>, Array2<S>) {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "expm needs a square matrix");
    let mut aug = Array2::from_elem((2 * n, 2 * n), S::zero());
    for i in 0..n {
        for j in 0..n {
            aug[[i, j]] = m[[i, j]];
        }
        aug[[i, n + i]] = S::one();
    }
    let e = expm(aug.view());
    let phi = e.slice(ndarray::s![0..n, 0..n]).to_owned();
    let gamma = e.slice(ndarray::s![0..n, n..2 * n]).to_owned();
    (phi, gamma)
}

/// Matrix exponential via Taylor series with scaling and squaring.
pub fn expm<S: Scalar>(a: ArrayView2<'_, S>) -> Array2<S> {
    let n = a.nrows();
    let norm = inf_norm(a);
    let mut squarings = 0u32;
    let half = S::lit(0.5);
    let mut scale = S::one();
    while norm * scale > half {
        scale = scale * half;
        squarings += 1;
    }
    let scaled = a.mapv(|v| v * scale);
    let mut result = Array2::from_elem((n, n), S::zero());
    let mut term = Array2::from_elem((n, n), S::zero());
    for i in 0..n {
        result[[i, i]] = S::one();
        term[[i, i]] = S::one();
    }
    for k in 1..=30usize {
        term = matmul(term.view(), scaled.view()).mapv(|v| v / S::of_usize(k));
        result = result + &term;
        if inf_norm(term.view()) <= S::epsilon() * inf_norm(result.view()) {
            break;
        }
    }
    for _ in 0..squarings {
        result = matmul(result.view(), result.view());
    }
    result
}

/// Dominant eigenvalue magnitude by power iteration. Intended for the
/// nonnegative transition matrices produced by RC networks.
pub fn spectral_radius<S: Scalar>(a: ArrayView2<'_, S>, iters: usize) -> S {
    let n = a.nrows();
    let mut v = Array1::from_elem(n, S::one());
    let mut lambda = S::zero();
    for _ in 0..iters {
        let w = matvec(a, v.view());
        let norm = w.iter().fold(S::zero(), |acc, x| acc.max(x.abs()));
        if norm == S::zero() {
            return S::zero();
        }
        lambda = norm;
        v = w.mapv(|x| x / norm);
    }
    lambda
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn expm_of_diagonal_matches_scalar_exponentials() {
        let a = array![[-0.5_f64, 0.0], [0.0, 1.25]];
        let e = expm(a.view());
        assert!((e[[0, 0]] - (-0.5f64).exp()).abs() < 1e-14);
        assert!((e[[1, 1]] - 1.25f64.exp()).abs() < 1e-13);
        assert_eq!(e[[0, 1]], 0.0);
    }

    #[test]
    fn integral_of_scalar_decay() {
        let a = array![[-2.0_f64]];
        let (phi, gamma) = expm_with_integral(a.view());
        assert!((phi[[0, 0]] - (-2.0f64).exp()).abs() < 1e-14);
        // ∫₀¹ e^{-2s} ds = (1 - e^{-2}) / 2
        assert!((gamma[[0, 0]] - (1.0 - (-2.0f64).exp()) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn nilpotent_rotation_generator() {
        let a = array![[0.0_f64, 1.0], [-1.0, 0.0]];
        let e = expm(a.view());
        assert!((e[[0, 0]] - 1.0f64.cos()).abs() < 1e-13);
        assert!((e[[0, 1]] - 1.0f64.sin()).abs() < 1e-13);
    }
}
