//! Compiles a district, a residual box and a policy class into one finite
//! linear program: states are eliminated over the horizon, decisions become
//! affine in past residuals, every row is made robust over the box, and the
//! worst-case expected cost is bounded by a single epigraph variable.

pub mod expr;
mod robust;
mod system;

use ndarray::Array1;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use expr::{AffineInW, LinExpr};
pub use robust::{assemble, epigraph_objective, robustify, LpRow, RobustRows};
pub use system::{first_step_inputs, parametrize, stack_system, StackedSystem};

use crate::dist_model::{MeanBox, StackedDisturbanceMap, UncertaintyBox};
use crate::lp::{export_lp, LinearProgram, Sense};
use crate::plant::{DistrictModel, DistrictState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompileError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("causality violated: {0}")]
    Causality(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("invalid policy: {0}")]
    Policy(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Certainty equivalence: residuals fixed at their expected value.
    Cep,
    /// Open loop: fixed decisions robust to the whole box.
    Olp,
    /// Strictly causal affine decision rules.
    Adr,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Cep => "cep",
            Mode::Olp => "olp",
            Mode::Adr => "adr",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySpec {
    pub mode: Mode,
    pub horizon: usize,
    pub n_disturbances: usize,
    /// Comfort band tightening in °C, certainty equivalence only.
    pub comfort_tightening: f64,
    /// Cost per Kelvin-hour of comfort slack.
    pub slack_penalty: f64,
    pub epsilon: f64,
}

impl PolicySpec {
    pub fn new(mode: Mode, horizon: usize, n_disturbances: usize) -> Self {
        Self {
            mode,
            horizon,
            n_disturbances,
            comfort_tightening: 0.0,
            slack_penalty: 1e3,
            epsilon: 0.01,
        }
    }

    pub fn validate(&self) -> Result<(), CompileError> {
        if self.horizon == 0 {
            return Err(CompileError::Policy("horizon must be positive".into()));
        }
        if !(self.comfort_tightening >= 0.0 && self.comfort_tightening.is_finite()) {
            return Err(CompileError::Policy("tightening must be non-negative".into()));
        }
        if self.comfort_tightening > 0.0 && self.mode != Mode::Cep {
            return Err(CompileError::Policy("tightening applies to certainty equivalence only".into()));
        }
        if !(self.slack_penalty >= 0.0 && self.slack_penalty.is_finite()) {
            return Err(CompileError::Policy("slack penalty must be non-negative".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(CompileError::Policy("epsilon must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    Comfort,
    Slack,
    BuildingLimit,
    DeviceLimit,
    Balance,
    Grid,
    Epigraph,
    AbsAux,
}

/// A row `expr ≤ 0` or `expr = 0` that must hold for every residual.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceRow {
    pub name: String,
    pub kind: RowKind,
    pub sense: Sense,
    pub expr: AffineInW,
}

impl SourceRow {
    /// Amount by which the row fails at `(z, w)`.
    pub fn violation(&self, z: &[f64], w: &[f64]) -> f64 {
        let v = self.expr.eval(z, w);
        match self.sense {
            Sense::Le => v.max(0.0),
            Sense::Ge => (-v).max(0.0),
            Sense::Eq => v.abs(),
        }
    }
}

/// Column registry with the decision structure laid over it.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub horizon: usize,
    pub names: Vec<String>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Step of each decision column; `None` for here-and-now and helper
    /// columns.
    pub steps: Vec<Option<usize>>,
    /// Feedback gains per decision column.
    pub feedback: Vec<Vec<Gain>>,
    /// Decisions fixed by a balance, as an expression in the others.
    pub eliminated: Vec<Option<LinExpr>>,
    /// Negative half of a split gain, indexed by its positive half.
    pub partner: Vec<Option<usize>>,
    /// `u[t][building][input]`.
    pub u: Vec<Vec<Vec<usize>>>,
    /// `v[building][blind]`.
    pub v: Vec<Vec<usize>>,
    /// `a[t][hub free input]`.
    pub a: Vec<Vec<usize>>,
    /// `p[t]`, grid purchase.
    pub p: Vec<usize>,
    /// `s[t][building][room]`.
    pub s: Vec<Vec<Vec<usize>>>,
}

impl Layout {
    pub fn empty(horizon: usize) -> Self {
        Self {
            horizon,
            names: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            steps: Vec::new(),
            feedback: Vec::new(),
            eliminated: Vec::new(),
            partner: Vec::new(),
            u: Vec::new(),
            v: Vec::new(),
            a: Vec::new(),
            p: Vec::new(),
            s: Vec::new(),
        }
    }

    pub fn new(district: &DistrictModel<f64>, horizon: usize) -> Self {
        let mut l = Self::empty(horizon);
        let free = f64::NEG_INFINITY..f64::INFINITY;
        for t in 0..horizon {
            let mut ut = Vec::new();
            let mut st = Vec::new();
            for (bi, b) in district.buildings.iter().enumerate() {
                ut.push((0..b.input_dim).map(|j| l.add_decision(format!("u.b{bi}.j{j}.t{t}"), t)).collect());
                st.push((0..b.n_rooms).map(|r| l.add_decision(format!("s.b{bi}.r{r}.t{t}"), t)).collect());
            }
            l.u.push(ut);
            l.s.push(st);
            let mut at = Vec::new();
            for d in &district.hub.devices {
                for f in 0..d.n_free() {
                    at.push(l.add_decision(format!("a.{}.{f}.t{t}", d.id), t));
                }
            }
            l.a.push(at);
            let p = l.add_decision(format!("p.t{t}"), t);
            l.p.push(p);
        }
        for (bi, b) in district.buildings.iter().enumerate() {
            let cols = (0..b.blind_dim)
                .map(|k| l.add_col(format!("v.b{bi}.l{k}"), free.start, free.end))
                .collect();
            l.v.push(cols);
        }
        l
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn add_col(&mut self, name: String, lower: f64, upper: f64) -> usize {
        self.names.push(name);
        self.lower.push(lower);
        self.upper.push(upper);
        self.steps.push(None);
        self.feedback.push(Vec::new());
        self.eliminated.push(None);
        self.partner.push(None);
        self.names.len() - 1
    }

    fn add_decision(&mut self, name: String, step: usize) -> usize {
        let c = self.add_col(name, f64::NEG_INFINITY, f64::INFINITY);
        self.steps[c] = Some(step);
        c
    }

    pub fn step_of(&self, col: usize) -> Option<usize> {
        self.steps.get(col).copied().flatten()
    }

    /// One gain per decision of step `t` and residual `(i, s)`, `s < t`,
    /// stored as the difference of two non-negative columns. Residuals with
    /// `active[w] == false` are known exactly and get no gain.
    pub fn add_feedback(&mut self, n_disturbances: usize, active: &[bool]) {
        let n = self.n_cols();
        for col in 0..n {
            let Some(t) = self.steps[col] else { continue };
            if self.eliminated[col].is_some() {
                continue;
            }
            for i in 0..n_disturbances {
                for s in 0..t {
                    let w = i * self.horizon + s;
                    if !active[w] {
                        continue;
                    }
                    let base = format!("q.{}.w{i}.{s}", self.names[col]);
                    let pos = self.add_col(format!("{base}.pos"), 0.0, f64::INFINITY);
                    let neg = self.add_col(format!("{base}.neg"), 0.0, f64::INFINITY);
                    self.partner[pos] = Some(neg);
                    self.feedback[col].push(Gain { w, pos, neg });
                }
            }
        }
    }

    /// Replaces decision `col` by `expr` from here on.
    pub fn eliminate(&mut self, col: usize, expr: LinExpr) {
        for e in self.eliminated.iter_mut().flatten() {
            e.substitute(col, &expr);
        }
        self.eliminated[col] = Some(expr);
        self.lower[col] = 0.0;
        self.upper[col] = 0.0;
    }

    /// Value of a decision under residuals `w`.
    pub fn decision_value(&self, col: usize, z: &[f64], w: &[f64]) -> f64 {
        if let Some(e) = &self.eliminated[col] {
            return e.constant
                + e.terms.iter().map(|(c, k)| k * self.decision_value(*c, z, w)).sum::<f64>();
        }
        z[col]
            + self.feedback[col]
                .iter()
                .map(|g| (z[g.pos] - z[g.neg]) * w[g.w])
                .sum::<f64>()
    }

    /// Value with every residual at zero.
    pub fn nominal_value(&self, col: usize, z: &[f64]) -> f64 {
        match &self.eliminated[col] {
            Some(e) => e.constant + e.terms.iter().map(|(c, k)| k * self.nominal_value(*c, z)).sum::<f64>(),
            None => z[col],
        }
    }

    pub fn n_feedback(&self) -> usize {
        self.feedback.iter().map(Vec::len).sum()
    }
}

/// Feedback from residual `w` through the column pair `pos − neg`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gain {
    pub w: usize,
    pub pos: usize,
    pub neg: usize,
}

/// Inputs to apply at the first step.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstStep {
    pub building_inputs: Vec<Array1<f64>>,
    pub blinds: Vec<Array1<f64>>,
    /// Full device input vectors (converter outputs included).
    pub hub_inputs: Vec<Array1<f64>>,
    pub grid: f64,
}

/// The finite LP plus what is needed to interpret its solutions.
#[derive(Debug, Clone)]
pub struct CompiledRobustLP {
    pub mode: Mode,
    pub lp: LinearProgram,
    /// Role of each LP row; the row name carries building, room and step.
    pub kinds: Vec<RowKind>,
    pub layout: Layout,
    /// Rows before the box counterpart, in LP columns.
    pub source_rows: Vec<SourceRow>,
    /// Expected cost with `w` read as the residual mean.
    pub cost: AffineInW,
    pub tau: usize,
    pub w_center: Vec<f64>,
    pub w_radius: Vec<f64>,
    pub mu_lower: Vec<f64>,
    pub mu_upper: Vec<f64>,
    pub warnings: Vec<String>,
}

impl CompiledRobustLP {
    pub fn first_step(&self, district: &DistrictModel<f64>, z: &[f64]) -> FirstStep {
        first_step_inputs(district, &self.layout, z)
    }

    /// Largest violation of the original rows at a residual realisation.
    pub fn max_violation(&self, z: &[f64], w: &[f64]) -> (f64, Option<&str>) {
        let mut worst = (0.0, None);
        for r in &self.source_rows {
            let v = r.violation(z, w);
            if v > worst.0 {
                worst = (v, Some(r.name.as_str()));
            }
        }
        worst
    }

    pub fn to_lp_text(&self) -> String {
        export_lp(&self.lp)
    }

    pub fn n_aux(&self) -> usize {
        self.layout.names.iter().filter(|n| n.starts_with('y')).count()
    }
}

/// Full pipeline: stack, attach policies, robustify, add the epigraph.
#[allow(clippy::too_many_arguments)]
pub fn compile(
    district: &DistrictModel<f64>,
    spec: &PolicySpec,
    w_box: &UncertaintyBox<f64>,
    mu_box: &MeanBox<f64>,
    map: &StackedDisturbanceMap<f64>,
    state: &DistrictState<f64>,
    first_hour: usize,
) -> Result<CompiledRobustLP, CompileError> {
    spec.validate()?;
    let nd = district.n_disturbances();
    let dim = spec.horizon * nd;
    if spec.n_disturbances != nd {
        return Err(CompileError::Dimension(format!(
            "policy expects {} disturbances, district has {nd}",
            spec.n_disturbances
        )));
    }
    if w_box.dim() != dim || mu_box.lower.len() != dim || mu_box.upper.len() != dim {
        return Err(CompileError::Dimension(format!("boxes must have {dim} coordinates")));
    }
    let (w_box, mu_box) = if spec.mode == Mode::Cep {
        (w_box.to_point(), mu_box.to_point())
    } else {
        (w_box.clone(), mu_box.clone())
    };
    let mut sys = stack_system(district, map, state, first_hour, spec)?;
    let w_center = w_box.center();
    let w_radius = w_box.radius();
    parametrize(spec, &mut sys, &w_radius)?;
    let mut layout = sys.layout;
    let mut rows = robustify(&sys.rows, &w_center, &w_radius, &mut layout)?;
    let tau = epigraph_objective(&sys.cost, &mu_box.lower, &mu_box.upper, &mut layout, &mut rows)?;
    let (lp, kinds) = assemble(&layout, &rows.rows, tau)?;
    Ok(CompiledRobustLP {
        mode: spec.mode,
        lp,
        kinds,
        layout,
        source_rows: sys.rows,
        cost: sys.cost,
        tau,
        w_center,
        w_radius,
        mu_lower: mu_box.lower,
        mu_upper: mu_box.upper,
        warnings: sys.warnings,
    })
}
