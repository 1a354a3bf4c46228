//! Sparse linear programs: solving, independent verification and the
//! text LP format.

mod format;
mod solve;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use format::{export_lp, import_lp};
pub use solve::{solve, SolveOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// `min cᵀx` subject to sparse rows and column bounds.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LinearProgram {
    pub col_names: Vec<String>,
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub row_names: Vec<String>,
    pub senses: Vec<Sense>,
    pub rhs: Vec<f64>,
    /// Row-major, ascending by row then insertion order.
    pub triplets: Vec<Triplet>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("invalid program: {0}")]
    Invalid(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n_cols(&self) -> usize {
        self.objective.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn add_col(&mut self, name: impl Into<String>, cost: f64, lower: f64, upper: f64) -> usize {
        self.col_names.push(name.into());
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.len() - 1
    }

    /// Appends a row, merging duplicate columns and dropping zeros.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: &[(usize, f64)],
        sense: Sense,
        rhs: f64,
    ) -> usize {
        let row = self.rhs.len();
        let mut merged: Vec<(usize, f64)> = coeffs.to_vec();
        merged.sort_by_key(|(c, _)| *c);
        let mut last: Option<usize> = None;
        let start = self.triplets.len();
        for (col, value) in merged {
            if last == Some(col) {
                self.triplets.last_mut().unwrap().value += value;
                continue;
            }
            last = Some(col);
            self.triplets.push(Triplet { row, col, value });
        }
        let mut kept = start;
        for i in start..self.triplets.len() {
            if self.triplets[i].value != 0.0 {
                self.triplets[kept] = self.triplets[i];
                kept += 1;
            }
        }
        self.triplets.truncate(kept);
        self.row_names.push(name.into());
        self.senses.push(sense);
        self.rhs.push(rhs);
        row
    }

    /// Index range of each row's triplets.
    pub fn row_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut ranges = vec![0..0; self.n_rows()];
        let mut i = 0;
        for (r, range) in ranges.iter_mut().enumerate() {
            let s = i;
            while i < self.triplets.len() && self.triplets[i].row == r {
                i += 1;
            }
            *range = s..i;
        }
        ranges
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.n_cols();
        let m = self.n_rows();
        if self.lower.len() != n || self.upper.len() != n || self.col_names.len() != n {
            return Err(LpError::Invalid("column arrays differ in length".into()));
        }
        if self.senses.len() != m || self.row_names.len() != m {
            return Err(LpError::Invalid("row arrays differ in length".into()));
        }
        if self.objective.iter().chain(&self.rhs).any(|v| !v.is_finite()) {
            return Err(LpError::Invalid("non-finite objective or right-hand side".into()));
        }
        for j in 0..n {
            if self.lower[j] > self.upper[j] || self.lower[j] == f64::INFINITY || self.upper[j] == f64::NEG_INFINITY {
                return Err(LpError::Invalid(format!("bad bounds on {}", self.col_names[j])));
            }
        }
        let mut prev = 0;
        let mut seen = vec![false; m];
        for t in &self.triplets {
            if t.row >= m || t.col >= n || !t.value.is_finite() || t.value == 0.0 || t.row < prev {
                return Err(LpError::Invalid(format!("bad coefficient in row {}", t.row)));
            }
            prev = t.row;
            seen[t.row] = true;
        }
        if let Some(r) = seen.iter().position(|s| !s) {
            return Err(LpError::Invalid(format!("row {} is empty", self.row_names[r])));
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Row activities `A x`.
    pub fn activities(&self, x: &[f64]) -> Vec<f64> {
        let mut act = vec![0.0; self.n_rows()];
        for t in &self.triplets {
            act[t.row] += t.value * x[t.col];
        }
        act
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    IterLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub status: Status,
    pub x: Vec<f64>,
    pub objective: f64,
    pub max_residual: f64,
}

impl Solution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    /// JSON with status, objective and named column values.
    pub fn to_json(&self, lp: &LinearProgram) -> String {
        let values: serde_json::Map<String, serde_json::Value> = lp
            .col_names
            .iter()
            .zip(&self.x)
            .map(|(n, v)| (n.clone(), serde_json::json!(v)))
            .collect();
        serde_json::to_string_pretty(&serde_json::json!({
            "status": self.status,
            "objective": self.objective,
            "max_residual": self.max_residual,
            "values": values,
        }))
        .expect("solution serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub max_violation: f64,
    pub worst_row: Option<usize>,
    pub worst_tag: Option<String>,
    pub max_bound_violation: f64,
    pub objective: f64,
    pub feasible: bool,
}

/// Recomputes every row and bound residual of `x` from scratch.
pub fn verify(lp: &LinearProgram, x: &[f64], tol: f64) -> VerifyReport {
    assert_eq!(x.len(), lp.n_cols(), "point has wrong dimension");
    let act = lp.activities(x);
    let mut worst = (0.0, None);
    for (r, a) in act.iter().enumerate() {
        let v = match lp.senses[r] {
            Sense::Le => a - lp.rhs[r],
            Sense::Ge => lp.rhs[r] - a,
            Sense::Eq => (a - lp.rhs[r]).abs(),
        };
        if v > worst.0 {
            worst = (v, Some(r));
        }
    }
    let max_bound_violation = x
        .iter()
        .enumerate()
        .map(|(j, v)| (lp.lower[j] - v).max(v - lp.upper[j]).max(0.0))
        .fold(0.0, f64::max);
    VerifyReport {
        max_violation: worst.0,
        worst_row: worst.1,
        worst_tag: worst.1.map(|r| lp.row_names[r].clone()),
        max_bound_violation,
        objective: lp.objective_value(x),
        feasible: worst.0 <= tol && max_bound_violation <= tol,
    }
}
