use std::collections::BTreeMap;

/// `constant + Σ coef · column` with columns kept sorted and unique.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinExpr {
    pub constant: f64,
    pub terms: Vec<(usize, f64)>,
}

impl LinExpr {
    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            terms: Vec::new(),
        }
    }

    pub fn var(col: usize, coef: f64) -> Self {
        Self {
            constant: 0.0,
            terms: if coef == 0.0 { Vec::new() } else { vec![(col, coef)] },
        }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.terms.is_empty()
    }

    /// `self += k · other`.
    pub fn add_scaled(&mut self, k: f64, other: &LinExpr) {
        if k == 0.0 {
            return;
        }
        self.constant += k * other.constant;
        if other.terms.is_empty() {
            return;
        }
        if self.terms.is_empty() {
            self.terms = other.terms.iter().map(|(c, v)| (*c, k * v)).collect();
            return;
        }
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                out.push((b[j].0, k * b[j].1));
                j += 1;
            } else {
                let v = a[i].1 + k * b[j].1;
                if v != 0.0 {
                    out.push((a[i].0, v));
                }
                i += 1;
                j += 1;
            }
        }
        self.terms = out;
    }

    pub fn add_term(&mut self, col: usize, coef: f64) {
        self.add_scaled(coef, &LinExpr::var(col, 1.0));
    }

    pub fn coef(&self, col: usize) -> f64 {
        self.terms
            .binary_search_by_key(&col, |(c, _)| *c)
            .map_or(0.0, |i| self.terms[i].1)
    }

    /// Replaces column `col` by `expr`.
    pub fn substitute(&mut self, col: usize, expr: &LinExpr) {
        if let Ok(i) = self.terms.binary_search_by_key(&col, |(c, _)| *c) {
            let k = self.terms.remove(i).1;
            self.add_scaled(k, expr);
        }
    }

    pub fn scaled(&self, k: f64) -> LinExpr {
        let mut e = LinExpr::default();
        e.add_scaled(k, self);
        e
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|(c, v)| v * z[*c]).sum::<f64>()
    }
}

/// `a₀(z) + Σ_j a_j(z) w_j` with every `a` affine in the columns `z`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AffineInW {
    pub nominal: LinExpr,
    pub grad: BTreeMap<usize, LinExpr>,
}

impl AffineInW {
    pub fn constant(c: f64) -> Self {
        Self {
            nominal: LinExpr::constant(c),
            grad: BTreeMap::new(),
        }
    }

    pub fn from_nominal(e: LinExpr) -> Self {
        Self {
            nominal: e,
            grad: BTreeMap::new(),
        }
    }

    pub fn add_scaled(&mut self, k: f64, other: &AffineInW) {
        if k == 0.0 {
            return;
        }
        self.nominal.add_scaled(k, &other.nominal);
        for (j, g) in &other.grad {
            self.grad.entry(*j).or_default().add_scaled(k, g);
        }
        self.grad.retain(|_, g| !g.is_zero());
    }

    pub fn add_grad(&mut self, j: usize, e: &LinExpr) {
        let g = self.grad.entry(j).or_default();
        g.add_scaled(1.0, e);
        if g.is_zero() {
            self.grad.remove(&j);
        }
    }

    pub fn scaled(&self, k: f64) -> AffineInW {
        let mut e = AffineInW::default();
        e.add_scaled(k, self);
        e
    }

    pub fn has_uncertainty(&self) -> bool {
        !self.grad.is_empty()
    }

    pub fn eval(&self, z: &[f64], w: &[f64]) -> f64 {
        self.nominal.eval(z) + self.grad.iter().map(|(j, g)| g.eval(z) * w[*j]).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_cancels_and_sorts() {
        let mut a = LinExpr::var(3, 2.0);
        a.add_term(1, 1.0);
        a.add_scaled(-2.0, &LinExpr::var(3, 1.0));
        assert_eq!(a.terms, vec![(1, 1.0)]);
        a.add_scaled(0.5, &LinExpr { constant: 4.0, terms: vec![(0, 2.0), (1, 2.0), (5, 1.0)] });
        assert_eq!(a.constant, 2.0);
        assert_eq!(a.terms, vec![(0, 1.0), (1, 2.0), (5, 0.5)]);
        assert_eq!(a.eval(&[1.0, 1.0, 0.0, 0.0, 0.0, 2.0]), 6.0);
    }

    #[test]
    fn affine_eval() {
        let mut r = AffineInW::constant(1.0);
        r.add_grad(0, &LinExpr::constant(2.0));
        r.add_grad(1, &LinExpr::var(0, -3.0));
        assert_eq!(r.eval(&[1.0], &[1.0, 1.0]), 0.0);
        let neg = r.scaled(-1.0);
        let mut zero = r.clone();
        zero.add_scaled(1.0, &neg);
        assert!(zero.nominal.is_zero() && zero.grad.is_empty());
    }
}
