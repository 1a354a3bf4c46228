use std::collections::HashMap;

use super::expr::{AffineInW, LinExpr};
use super::{CompileError, Layout, RowKind, SourceRow};
use crate::lp::{LinearProgram, Sense};

/// A finite row `coeffs · z (sense) rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub name: String,
    pub kind: RowKind,
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Rows after the box counterpart, sharing absolute-value auxiliaries
/// between rows whose `w`-coefficients agree up to scale.
#[derive(Debug, Clone, Default)]
pub struct RobustRows {
    pub rows: Vec<LpRow>,
    cache: HashMap<Vec<u64>, usize>,
    pub n_aux: usize,
}

fn aux_key(g: &LinExpr) -> (Vec<u64>, f64) {
    let k = g.terms[0].1;
    let mut key = Vec::with_capacity(2 * g.terms.len() + 1);
    // Adding zero folds −0.0 into 0.0 so mirrored gradients share a key.
    key.push((g.constant / k + 0.0).to_bits());
    for (c, v) in &g.terms {
        key.push(*c as u64);
        key.push((v / k + 0.0).to_bits());
    }
    (key, k)
}

fn to_row(name: String, kind: RowKind, e: &LinExpr, sense: Sense) -> LpRow {
    LpRow {
        name,
        kind,
        coeffs: e.terms.clone(),
        sense,
        rhs: -e.constant,
    }
}

impl RobustRows {
    pub fn new() -> Self {
        Self::default()
    }

    /// Column `y ≥ |g(z)| / |k|` for the direction of `g`, created once.
    fn abs_column(&mut self, layout: &mut Layout, g: &LinExpr) -> (usize, f64) {
        let (key, k) = aux_key(g);
        if let Some(&col) = self.cache.get(&key) {
            return (col, k.abs());
        }
        let id = self.n_aux;
        self.n_aux += 1;
        let col = layout.add_col(format!("y{id}"), 0.0, f64::INFINITY);
        let unit = g.scaled(1.0 / k);
        let mut up = unit.clone();
        up.add_term(col, -1.0);
        let mut down = unit.scaled(-1.0);
        down.add_term(col, -1.0);
        self.rows.push(to_row(format!("abs_pos.y{id}"), RowKind::AbsAux, &up, Sense::Le));
        self.rows.push(to_row(format!("abs_neg.y{id}"), RowKind::AbsAux, &down, Sense::Le));
        self.cache.insert(key, col);
        (col, k.abs())
    }

    /// Adds the worst case of `expr ≤ 0` (or `expr = 0` for every `w`)
    /// over the box with the given centre and half-widths.
    pub fn add(
        &mut self,
        layout: &mut Layout,
        name: &str,
        kind: RowKind,
        sense: Sense,
        expr: &AffineInW,
        center: &[f64],
        radius: &[f64],
    ) -> Result<(), CompileError> {
        let mut row = expr.nominal.clone();
        for (j, g) in &expr.grad {
            row.add_scaled(center[*j], g);
        }
        match sense {
            Sense::Le => {
                for (j, g) in &expr.grad {
                    let r = radius[*j];
                    if r == 0.0 {
                        continue;
                    }
                    if g.is_constant() {
                        row.constant += g.constant.abs() * r;
                    } else if let Some((pos, neg, k)) = split_gain(layout, g) {
                        row.add_term(pos, r * k);
                        row.add_term(neg, r * k);
                    } else {
                        let (col, scale) = self.abs_column(layout, g);
                        row.add_term(col, r * scale);
                    }
                }
                self.rows.push(to_row(name.to_string(), kind, &row, Sense::Le));
            }
            Sense::Eq => {
                self.rows.push(to_row(name.to_string(), kind, &row, Sense::Eq));
                for (j, g) in &expr.grad {
                    if radius[*j] == 0.0 {
                        continue;
                    }
                    if g.is_constant() {
                        return Err(CompileError::Infeasible(format!(
                            "{name} cannot hold for every residual {j}"
                        )));
                    }
                    self.rows.push(to_row(format!("{name}.w{j}"), kind, g, Sense::Eq));
                }
            }
            Sense::Ge => {
                return Err(CompileError::Dimension(format!("{name}: rows must be ≤ or =")));
            }
        }
        Ok(())
    }
}

/// `g = k (pos − neg)` for a split gain pair.
fn split_gain(layout: &Layout, g: &LinExpr) -> Option<(usize, usize, f64)> {
    match g.terms.as_slice() {
        [(a, x), (b, y)] if g.constant == 0.0 && *x == -*y => {
            if layout.partner[*a] == Some(*b) {
                Some((*a, *b, x.abs()))
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Box counterpart of every row.
pub fn robustify(
    rows: &[SourceRow],
    center: &[f64],
    radius: &[f64],
    layout: &mut Layout,
) -> Result<RobustRows, CompileError> {
    let mut out = RobustRows::new();
    for r in rows {
        out.add(layout, &r.name, r.kind, r.sense, &r.expr, center, radius)?;
    }
    Ok(out)
}

/// Adds `τ` and the single row `cost(z, μ) ≤ τ` for every `μ` in the
/// mean box. Returns the `τ` column.
pub fn epigraph_objective(
    cost: &AffineInW,
    mu_lower: &[f64],
    mu_upper: &[f64],
    layout: &mut Layout,
    out: &mut RobustRows,
) -> Result<usize, CompileError> {
    let tau = layout.add_col("tau".to_string(), f64::NEG_INFINITY, f64::INFINITY);
    let center: Vec<f64> = mu_lower.iter().zip(mu_upper).map(|(l, u)| 0.5 * (l + u)).collect();
    let radius: Vec<f64> = mu_lower.iter().zip(mu_upper).map(|(l, u)| 0.5 * (u - l)).collect();
    let mut e = cost.clone();
    e.nominal.add_term(tau, -1.0);
    out.add(layout, "epigraph", RowKind::Epigraph, Sense::Le, &e, &center, &radius)?;
    Ok(tau)
}

/// Builds the LP; single-column rows tighten that column's bounds.
pub fn assemble(layout: &Layout, rows: &[LpRow], tau: usize) -> Result<(LinearProgram, Vec<RowKind>), CompileError> {
    let mut lower = layout.lower.clone();
    let mut upper = layout.upper.clone();
    let mut kept = Vec::new();
    for row in rows {
        match row.coeffs.as_slice() {
            [] => {
                let ok = match row.sense {
                    Sense::Le => row.rhs >= -1e-9,
                    Sense::Ge => row.rhs <= 1e-9,
                    Sense::Eq => row.rhs.abs() <= 1e-9,
                };
                if !ok {
                    return Err(CompileError::Infeasible(format!(
                        "{} is violated for every decision",
                        row.name
                    )));
                }
            }
            [(col, a)] => {
                let v = row.rhs / a;
                let (lo, hi) = match (row.sense, *a > 0.0) {
                    (Sense::Eq, _) => (v, v),
                    (Sense::Le, true) | (Sense::Ge, false) => (lower[*col], v.min(upper[*col])),
                    _ => (v.max(lower[*col]), upper[*col]),
                };
                if lo <= hi && lo >= lower[*col] && hi <= upper[*col] {
                    lower[*col] = lo;
                    upper[*col] = hi;
                } else {
                    kept.push(row);
                }
            }
            _ => kept.push(row),
        }
    }
    let mut lp = LinearProgram::new();
    for (j, name) in layout.names.iter().enumerate() {
        lp.add_col(name.clone(), if j == tau { 1.0 } else { 0.0 }, lower[j], upper[j]);
    }
    let mut kinds = Vec::with_capacity(kept.len());
    for row in kept {
        lp.add_row(row.name.clone(), &row.coeffs, row.sense, row.rhs);
        kinds.push(row.kind);
    }
    Ok((lp, kinds))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout_with(n: usize) -> Layout {
        let mut l = Layout::empty(1);
        for k in 0..n {
            l.add_col(format!("z{k}"), f64::NEG_INFINITY, f64::INFINITY);
        }
        l
    }

    #[test]
    fn constant_gradient_folds_into_rhs() {
        // 1 + 2 w₁ − 3 w₂ ≤ 10 over [−1, 1]²: worst case 6.
        let mut e = AffineInW::constant(1.0 - 10.0);
        e.add_grad(0, &LinExpr::constant(2.0));
        e.add_grad(1, &LinExpr::constant(-3.0));
        let mut layout = layout_with(1);
        let mut rows = RobustRows::new();
        rows.add(&mut layout, "r", RowKind::Comfort, Sense::Le, &e, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(rows.rows[0].rhs, 4.0);
        assert!(rows.rows[0].coeffs.is_empty());
        let mut tight = e.clone();
        tight.nominal.constant += 5.0;
        let mut rows = RobustRows::new();
        rows.add(&mut layout, "r", RowKind::Comfort, Sense::Le, &tight, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!(assemble(&layout, &rows.rows, 0).is_err());
    }

    #[test]
    fn point_box_keeps_nominal() {
        let mut e = AffineInW::from_nominal(LinExpr::var(0, 1.0));
        e.add_grad(0, &LinExpr::var(1, 2.0));
        let mut layout = layout_with(2);
        let rows = robustify(
            &[SourceRow { name: "r".into(), kind: RowKind::Comfort, sense: Sense::Le, expr: e }],
            &[0.5],
            &[0.0],
            &mut layout,
        )
        .unwrap();
        assert_eq!(rows.n_aux, 0);
        assert_eq!(rows.rows[0].coeffs, vec![(0, 1.0), (1, 1.0)]);
    }

    #[test]
    fn mirrored_gradients_share_an_auxiliary() {
        let mut up = AffineInW::constant(-1.0);
        up.add_grad(0, &LinExpr::var(0, 2.0));
        let down = up.scaled(-1.0);
        let mut layout = layout_with(1);
        let mut rows = RobustRows::new();
        rows.add(&mut layout, "a", RowKind::Comfort, Sense::Le, &up, &[0.0], &[1.0]).unwrap();
        rows.add(&mut layout, "b", RowKind::Comfort, Sense::Le, &down, &[0.0], &[1.0]).unwrap();
        assert_eq!(rows.n_aux, 1);
        assert_eq!(rows.rows.len(), 4);
    }
}
