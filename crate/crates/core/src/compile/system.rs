use ndarray::Array1;

use super::expr::{AffineInW, LinExpr};
use super::{CompileError, Layout, Mode, PolicySpec, RowKind, SourceRow};
use crate::dist_model::StackedDisturbanceMap;
use crate::linalg::matvec;
use crate::lp::Sense;
use crate::plant::{linearize_building, DistrictModel, DistrictState};

const CONSTANT_ROW_TOL: f64 = 1e-6;

/// Stacked system in the nominal decision columns, before any feedback
/// gains are attached.
#[derive(Debug, Clone)]
pub struct StackedSystem {
    pub layout: Layout,
    pub rows: Vec<SourceRow>,
    /// Expected-cost expression, affine in `w`.
    pub cost: AffineInW,
    /// Rows dropped because they involve no decision at all.
    pub warnings: Vec<String>,
}

fn xi_expr(map: &StackedDisturbanceMap<f64>, i: usize, t: usize) -> AffineInW {
    let r = map.index(i, t);
    let mut e = AffineInW::constant(map.offset[r]);
    for s in 0..=t {
        let c = map.index(i, s);
        let g = map.gain[[r, c]];
        if g != 0.0 {
            e.add_grad(c, &LinExpr::constant(g));
        }
    }
    e
}

/// `col · ξ` for a decision-free `ξ`.
fn times_column(xi: &AffineInW, col: usize) -> AffineInW {
    let mut e = AffineInW::from_nominal(LinExpr::var(col, xi.nominal.constant));
    for (j, g) in &xi.grad {
        e.add_grad(*j, &LinExpr::var(col, g.constant));
    }
    e
}

struct RowSink<'a> {
    rows: &'a mut Vec<SourceRow>,
    warnings: &'a mut Vec<String>,
}

impl RowSink<'_> {
    fn push(&mut self, name: String, kind: RowKind, sense: Sense, expr: AffineInW) {
        if expr.nominal.is_constant() && !expr.has_uncertainty() {
            let c = expr.nominal.constant;
            let violated = match sense {
                Sense::Le => c > CONSTANT_ROW_TOL,
                Sense::Ge => c < -CONSTANT_ROW_TOL,
                Sense::Eq => c.abs() > CONSTANT_ROW_TOL,
            };
            if violated {
                self.warnings.push(format!("{name}: fixed row violated by {c:.3e}"));
            }
            return;
        }
        self.rows.push(SourceRow {
            name,
            kind,
            sense,
            expr,
        });
    }
}

/// Forward-substitutes every state over the horizon and emits all device,
/// building, comfort, slack, balance and grid rows as `expr ≤ 0` or
/// `expr = 0`, affine in `w` with coefficients affine in the decisions.
pub fn stack_system(
    district: &DistrictModel<f64>,
    map: &StackedDisturbanceMap<f64>,
    state: &DistrictState<f64>,
    first_hour: usize,
    spec: &PolicySpec,
) -> Result<StackedSystem, CompileError> {
    let t_len = spec.horizon;
    let nd = district.n_disturbances();
    if map.horizon != t_len || map.n_disturbances != nd {
        return Err(CompileError::Dimension(format!(
            "disturbance map is {}×{}, expected horizon {t_len} with {nd} disturbances",
            map.horizon, map.n_disturbances
        )));
    }
    if state.buildings.len() != district.buildings.len() || state.devices.len() != district.hub.devices.len() {
        return Err(CompileError::Dimension("state does not match the district".into()));
    }
    let layout = Layout::new(district, t_len);
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let mut sink = RowSink {
        rows: &mut rows,
        warnings: &mut warnings,
    };
    let xi: Vec<Vec<AffineInW>> = (0..t_len)
        .map(|t| (0..nd).map(|i| xi_expr(map, i, t)).collect())
        .collect();

    // Building inputs aggregated per demand stream and step.
    let mut demand = vec![vec![LinExpr::default(); 3]; t_len];

    for (bi, b) in district.buildings.iter().enumerate() {
        let xb = &state.buildings[bi];
        if xb.len() != b.state_dim {
            return Err(CompileError::Dimension(format!("state of building {} has wrong length", b.id)));
        }
        let lin = linearize_building(b, xb).map_err(|e| CompileError::Dimension(e.to_string()))?;
        let n = b.state_dim;
        let mut x: Vec<AffineInW> = xb.iter().map(|v| AffineInW::constant(*v)).collect();
        let eta = b.coupling();
        for t in 0..t_len {
            let u_cols = &layout.u[t][bi];
            let v_cols = &layout.v[bi];
            for k in 0..b.h.len() {
                let time_invariant = b.f_x.row(k).iter().all(|v| *v == 0.0)
                    && b.f_u.row(k).iter().all(|v| *v == 0.0)
                    && b.f_xi.row(k).iter().all(|v| *v == 0.0);
                if time_invariant && t > 0 {
                    continue;
                }
                let mut e = AffineInW::constant(-b.h[k]);
                for q in 0..n {
                    e.add_scaled(b.f_x[[k, q]], &x[q]);
                }
                for (j, col) in u_cols.iter().enumerate() {
                    e.nominal.add_term(*col, b.f_u[[k, j]]);
                }
                for (l, col) in v_cols.iter().enumerate() {
                    e.nominal.add_term(*col, b.f_v[[k, l]]);
                }
                for i in 0..nd {
                    e.add_scaled(b.f_xi[[k, i]], &xi[t][i]);
                }
                sink.push(format!("building.b{bi}.k{k}.t{t}"), RowKind::BuildingLimit, Sense::Le, e);
            }
            let mut next = Vec::with_capacity(n);
            for r in 0..n {
                let mut e = AffineInW::default();
                for q in 0..n {
                    e.add_scaled(lin.a[[r, q]], &x[q]);
                }
                for (j, col) in u_cols.iter().enumerate() {
                    e.nominal.add_term(*col, lin.b[[r, j]]);
                }
                for i in 0..nd {
                    e.add_scaled(lin.d[[r, i]], &xi[t][i]);
                    for (l, col) in v_cols.iter().enumerate() {
                        let c = lin.c[l][[r, i]];
                        if c != 0.0 {
                            e.add_scaled(c, &times_column(&xi[t][i], *col));
                        }
                    }
                }
                next.push(e);
            }
            x = next;
            let hour = (first_hour + t + 1) % 24;
            let (lb, ub) = b.comfort.at(hour);
            for (room, &si) in b.room_states.iter().enumerate() {
                let s_col = layout.s[t][bi][room];
                if let Some(lb) = lb {
                    let mut e = x[si].scaled(-1.0);
                    e.nominal.constant += lb + spec.comfort_tightening;
                    e.nominal.add_term(s_col, -1.0);
                    sink.push(format!("comfort_lo.b{bi}.r{room}.t{t}"), RowKind::Comfort, Sense::Le, e);
                }
                if let Some(ub) = ub {
                    let mut e = x[si].clone();
                    e.nominal.constant -= ub - spec.comfort_tightening;
                    e.nominal.add_term(s_col, -1.0);
                    sink.push(format!("comfort_hi.b{bi}.r{room}.t{t}"), RowKind::Comfort, Sense::Le, e);
                }
                sink.push(
                    format!("slack.b{bi}.r{room}.t{t}"),
                    RowKind::Slack,
                    Sense::Le,
                    AffineInW::from_nominal(LinExpr::var(s_col, -1.0)),
                );
            }
            for (j, col) in u_cols.iter().enumerate() {
                for (stream, d) in demand[t].iter_mut().enumerate() {
                    d.add_term(*col, eta[[stream, j]]);
                }
            }
        }
    }

    let free_off = district.hub.free_offsets();
    let input_off = district.hub.input_offsets();
    let n_hub_inputs = district.hub.n_inputs();
    let mut hub_inputs: Vec<Vec<LinExpr>> = vec![vec![LinExpr::default(); n_hub_inputs]; t_len];
    for (di, dev) in district.hub.devices.iter().enumerate() {
        let x0: &Array1<f64> = &state.devices[di];
        if x0.len() != dev.state_dim {
            return Err(CompileError::Dimension(format!("state of device {} has wrong length", dev.id)));
        }
        let mut x: Vec<AffineInW> = x0.iter().map(|v| AffineInW::constant(*v)).collect();
        for t in 0..t_len {
            let a_cols = &layout.a[t][free_off[di]..free_off[di] + dev.n_free()];
            let u: Vec<LinExpr> = (0..dev.input_dim)
                .map(|p| {
                    let mut e = LinExpr::default();
                    for (f, col) in a_cols.iter().enumerate() {
                        e.add_term(*col, dev.input_map[[p, f]]);
                    }
                    e
                })
                .collect();
            for (p, e) in u.iter().enumerate() {
                hub_inputs[t][input_off[di] + p] = e.clone();
            }
            for k in 0..dev.n_rows() {
                let mut e = AffineInW::constant(-dev.h[k]);
                for q in 0..dev.state_dim {
                    e.add_scaled(dev.f_x[[k, q]], &x[q]);
                }
                for (p, ue) in u.iter().enumerate() {
                    e.nominal.add_scaled(dev.f_u[[k, p]], ue);
                }
                for i in 0..nd {
                    e.add_scaled(dev.f_xi[[k, i]], &xi[t][i]);
                }
                sink.push(format!("device.{}.k{k}.t{t}", dev.id), RowKind::DeviceLimit, Sense::Le, e);
            }
            if dev.state_dim > 0 {
                let mut next = Vec::with_capacity(dev.state_dim);
                for r in 0..dev.state_dim {
                    let mut e = AffineInW::default();
                    for q in 0..dev.state_dim {
                        e.add_scaled(dev.a[[r, q]], &x[q]);
                    }
                    for (p, ue) in u.iter().enumerate() {
                        e.nominal.add_scaled(dev.b[[r, p]], ue);
                    }
                    for i in 0..nd {
                        e.add_scaled(dev.c[[r, i]], &xi[t][i]);
                    }
                    next.push(e);
                }
                x = next;
            }
        }
        if dev.state_dim > 0 {
            // Terminal state must admit the idle input.
            for k in 0..dev.n_rows() {
                let mut e = AffineInW::constant(-dev.h[k]);
                for q in 0..dev.state_dim {
                    e.add_scaled(dev.f_x[[k, q]], &x[q]);
                }
                sink.push(format!("device.{}.k{k}.t{t_len}", dev.id), RowKind::DeviceLimit, Sense::Le, e);
            }
        }
    }

    let mut cost = AffineInW::default();
    for t in 0..t_len {
        let p_col = layout.p[t];
        for node in &district.hub.nodes {
            let mut e = LinExpr::default();
            e.add_term(p_col, node.h_p[0]);
            for (q, c) in node.h_u.iter().enumerate() {
                e.add_scaled(*c, &hub_inputs[t][q]);
            }
            for (stream, c) in node.h_d.iter().enumerate() {
                e.add_scaled(*c, &demand[t][stream]);
            }
            sink.push(
                format!("balance.{}.t{t}", node.name),
                RowKind::Balance,
                Sense::Eq,
                AffineInW::from_nominal(e),
            );
        }
        sink.push(
            format!("grid.t{t}"),
            RowKind::Grid,
            Sense::Le,
            AffineInW::from_nominal(LinExpr::var(p_col, -1.0)),
        );
        let price = district.tariff.at(first_hour + t);
        cost.nominal.add_term(p_col, price);
        for per_b in &layout.s[t] {
            for col in per_b {
                cost.nominal.add_term(*col, spec.slack_penalty);
            }
        }
    }
    let mut layout = layout;
    eliminate_balances(&mut layout, &mut rows, &mut cost, &mut warnings);
    Ok(StackedSystem {
        layout,
        rows,
        cost,
        warnings,
    })
}

/// Solves each balance row for one decision (grid purchase first, then
/// hub devices, largest coefficient) and substitutes it everywhere.
fn eliminate_balances(layout: &mut Layout, rows: &mut Vec<SourceRow>, cost: &mut AffineInW, warnings: &mut Vec<String>) {
    let grid: std::collections::HashSet<usize> = layout.p.iter().copied().collect();
    let hub: std::collections::HashSet<usize> = layout.a.iter().flatten().copied().collect();
    while let Some(k) = rows.iter().position(|r| r.kind == RowKind::Balance) {
        let row = rows.remove(k);
        let e = &row.expr.nominal;
        let rank = |c: usize| {
            if grid.contains(&c) {
                2
            } else if hub.contains(&c) {
                1
            } else {
                0
            }
        };
        let pivot = e
            .terms
            .iter()
            .filter(|(c, _)| layout.step_of(*c).is_some())
            .max_by(|a, b| {
                (rank(a.0), a.1.abs())
                    .partial_cmp(&(rank(b.0), b.1.abs()))
                    .unwrap()
                    .then(b.0.cmp(&a.0))
            })
            .copied();
        let Some((col, coef)) = pivot else {
            if e.constant.abs() > CONSTANT_ROW_TOL || row.expr.has_uncertainty() {
                warnings.push(format!("{}: balance cannot be met", row.name));
            }
            continue;
        };
        let mut value = e.clone();
        value.substitute(col, &LinExpr::default());
        let value = value.scaled(-1.0 / coef);
        for r in rows.iter_mut() {
            r.expr.nominal.substitute(col, &value);
        }
        cost.nominal.substitute(col, &value);
        layout.eliminate(col, value);
    }
    // Substitution can leave rows without any decision.
    rows.retain(|r| {
        let fixed = r.expr.nominal.is_constant() && !r.expr.has_uncertainty();
        if fixed && r.expr.nominal.constant > CONSTANT_ROW_TOL && r.sense == Sense::Le {
            warnings.push(format!("{}: fixed row violated", r.name));
        }
        !fixed
    });
}

/// Attaches strictly causal feedback gains: every decision of step `t`
/// gains one column per residual `w_{i,s}`, `s < t`, and each row's
/// nominal decision terms spill into the matching `w`-coefficients.
/// Coordinates with zero radius are known exactly and get no gain.
pub fn parametrize(spec: &PolicySpec, sys: &mut StackedSystem, w_radius: &[f64]) -> Result<(), CompileError> {
    if w_radius.len() != spec.horizon * spec.n_disturbances {
        return Err(CompileError::Dimension(format!(
            "radius has {} coordinates, expected {}",
            w_radius.len(),
            spec.horizon * spec.n_disturbances
        )));
    }
    if spec.mode == Mode::Adr {
        let active: Vec<bool> = w_radius.iter().map(|r| *r > 0.0).collect();
        sys.layout.add_feedback(spec.n_disturbances, &active);
    }
    let layout = &sys.layout;
    let t_len = layout.horizon;
    let spill = |e: &mut AffineInW| -> Result<(), CompileError> {
        let nominal = e.nominal.terms.clone();
        for (col, coef) in nominal {
            let Some(step) = layout.step_of(col) else { continue };
            for g in &layout.feedback[col] {
                if g.w % t_len >= step {
                    return Err(CompileError::Causality(format!(
                        "{} would depend on residual {}",
                        layout.names[col], g.w
                    )));
                }
                let mut d = LinExpr::var(g.pos, coef);
                d.add_term(g.neg, -coef);
                e.add_grad(g.w, &d);
            }
        }
        Ok(())
    };
    for row in &mut sys.rows {
        spill(&mut row.expr)?;
    }
    spill(&mut sys.cost)?;
    Ok(())
}

/// Decisions at the first step, read back from a primal vector.
pub fn first_step_inputs(district: &DistrictModel<f64>, layout: &Layout, x: &[f64]) -> super::FirstStep {
    let hub_free: Vec<f64> = layout.a[0].iter().map(|c| layout.nominal_value(*c, x)).collect();
    let off = district.hub.free_offsets();
    let hub_inputs = district
        .hub
        .devices
        .iter()
        .enumerate()
        .map(|(di, d)| {
            let a = Array1::from_vec(hub_free[off[di]..off[di] + d.n_free()].to_vec());
            matvec(d.input_map.view(), a.view())
        })
        .collect();
    super::FirstStep {
        building_inputs: layout.u[0].iter().map(|cols| Array1::from_iter(cols.iter().map(|c| x[*c]))).collect(),
        blinds: layout.v.iter().map(|cols| Array1::from_iter(cols.iter().map(|c| x[*c]))).collect(),
        hub_inputs,
        grid: layout.nominal_value(layout.p[0], x),
    }
}

#[cfg(test)]
mod tests {
    use ndarray::Array2;

    use super::*;
    use crate::dist_model::{stack_disturbance, ArModel};
    use crate::plant::{
        Actuator, BuildingConfig, BuildingSpec, ComfortConfig, DeviceKind, DistrictConfig, DisturbanceKind, MassClass,
    };

    fn toy(kinds: &[DisturbanceKind]) -> DistrictModel<f64> {
        DistrictConfig {
            disturbances: kinds.to_vec(),
            buildings: vec![BuildingConfig {
                spec: BuildingSpec::new("b", 1, MassClass::Heavy, &[Actuator::Radiator, Actuator::Ahu, Actuator::Blinds]),
                comfort: ComfortConfig::default(),
            }],
            hub_scale: None,
            tariff: None,
        }
        .build()
        .unwrap()
    }

    fn map(nd: usize, horizon: usize, alpha: f64) -> StackedDisturbanceMap<f64> {
        let model = ArModel {
            alpha: vec![alpha; 24],
            residuals: vec![Vec::new(); 24],
            mean_hat: vec![0.0; 24],
            var_hat: vec![1.0; 24],
            zero_energy: vec![false; 24],
        };
        let forecasts: Vec<Vec<f64>> = (0..nd).map(|i| (0..horizon).map(|t| 0.1 * (i + t) as f64).collect()).collect();
        stack_disturbance(&vec![&model; nd], &forecasts, &vec![0.2; nd], 11, horizon).unwrap()
    }

    fn system(kinds: &[DisturbanceKind], horizon: usize, mode: Mode, tightening: f64, m: &StackedDisturbanceMap<f64>) -> StackedSystem {
        let d = toy(kinds);
        let mut spec = PolicySpec::new(mode, horizon, kinds.len());
        spec.comfort_tightening = tightening;
        stack_system(&d, m, &d.initial_state(), 12, &spec).unwrap()
    }

    fn row<'a>(sys: &'a StackedSystem, name: &str) -> &'a SourceRow {
        sys.rows.iter().find(|r| r.name == name).unwrap_or_else(|| panic!("no row {name}"))
    }

    #[test]
    fn zero_disturbance_gain_is_deterministic() {
        let kinds = [DisturbanceKind::AmbientTemp, DisturbanceKind::SolarSouth];
        let mut m = map(2, 3, 0.5);
        m.gain = Array2::zeros(m.gain.dim());
        let sys = system(&kinds, 3, Mode::Adr, 0.0, &m);
        assert!(sys.rows.iter().all(|r| !r.expr.has_uncertainty()));
        assert!(!sys.cost.has_uncertainty());
    }

    #[test]
    fn battery_rows_match_hand_unrolling() {
        let kinds = [DisturbanceKind::AmbientTemp];
        let d = toy(&kinds);
        let m = map(1, 2, 0.0);
        let sys = system(&kinds, 2, Mode::Cep, 0.0, &m);
        let (di, bat) = d.hub.device(DeviceKind::Battery).unwrap();
        let off = d.hub.free_offsets()[di];
        let z: Vec<f64> = (0..sys.layout.n_cols()).map(|j| ((j * 7919) % 13) as f64 * 0.1 - 0.6).collect();
        let inputs = |t: usize| -> Array1<f64> {
            let a: Array1<f64> = (0..bat.n_free()).map(|f| sys.layout.nominal_value(sys.layout.a[t][off + f], &z)).collect();
            bat.input_map.dot(&a)
        };
        let xi = |t: usize| Array1::from_vec(vec![m.offset[t]]);
        let x1 = bat.a.dot(&d.initial_state().devices[di]) + bat.b.dot(&inputs(0)) + bat.c.dot(&xi(0));
        let x2 = bat.a.dot(&x1) + bat.b.dot(&inputs(1)) + bat.c.dot(&xi(1));
        let w0 = vec![0.0; 2];
        for k in 0..bat.n_rows() {
            let name = format!("device.{}.k{k}.t1", bat.id);
            if let Some(r) = sys.rows.iter().find(|r| r.name == name) {
                let want = bat.f_x.row(k).dot(&x1) + bat.f_u.row(k).dot(&inputs(1)) + bat.f_xi.row(k).dot(&xi(1)) - bat.h[k];
                assert!((r.expr.eval(&z, &w0) - want).abs() < 1e-12, "{name}");
            }
            let name = format!("device.{}.k{k}.t2", bat.id);
            if let Some(r) = sys.rows.iter().find(|r| r.name == name) {
                let want = bat.f_x.row(k).dot(&x2) - bat.h[k];
                assert!((r.expr.eval(&z, &w0) - want).abs() < 1e-12, "{name}");
            }
        }
        assert!(sys.rows.iter().any(|r| r.name.starts_with(&format!("device.{}.", bat.id)) && r.name.ends_with(".t2")));
    }

    #[test]
    fn tightening_shifts_comfort_bounds() {
        let kinds = [DisturbanceKind::AmbientTemp];
        let m = map(1, 4, 0.5);
        let base = system(&kinds, 4, Mode::Cep, 0.0, &m);
        let tight = system(&kinds, 4, Mode::Cep, 0.5, &m);
        let mut seen = 0;
        for r in base.rows.iter().filter(|r| r.kind == RowKind::Comfort) {
            let shift = row(&tight, &r.name).expr.nominal.constant - r.expr.nominal.constant;
            assert!((shift - 0.5).abs() < 1e-12, "{}: {shift}", r.name);
            seen += 1;
        }
        assert!(seen >= 8);
    }

    #[test]
    fn open_loop_gradients_are_decision_free() {
        let kinds = [DisturbanceKind::AmbientTemp, DisturbanceKind::InternalGains];
        let m = map(2, 3, 0.5);
        let mut sys = system(&kinds, 3, Mode::Olp, 0.0, &m);
        parametrize(&PolicySpec::new(Mode::Olp, 3, 2), &mut sys, &[1.0; 6]).unwrap();
        assert_eq!(sys.layout.n_feedback(), 0);
        for r in &sys.rows {
            for g in r.expr.grad.values() {
                assert!(g.terms.iter().all(|(c, _)| sys.layout.names[*c].starts_with('v')), "{}", r.name);
            }
        }
    }

    #[test]
    fn decision_rules_are_strictly_causal() {
        let kinds = [DisturbanceKind::AmbientTemp];
        let m = map(1, 2, 0.5);
        let mut sys = system(&kinds, 2, Mode::Adr, 0.0, &m);
        parametrize(&PolicySpec::new(Mode::Adr, 2, 1), &mut sys, &[1.0, 1.0]).unwrap();
        let l = &sys.layout;
        for col in 0..l.n_cols() {
            match l.step_of(col) {
                Some(0) => assert!(l.feedback[col].is_empty()),
                Some(1) if l.eliminated[col].is_none() => {
                    assert_eq!(l.feedback[col].len(), 1);
                    assert_eq!(l.feedback[col][0].w, 0);
                }
                _ => {}
            }
        }
        // The step-1 grid purchase is eliminated, so its balance spills into w₀.
        let grid = row(&sys, "grid.t1");
        let g = grid.expr.grad.get(&0).expect("grid row reacts to w0");
        assert!(g.terms.iter().any(|(c, _)| l.names[*c].starts_with("q.")));
    }

    #[test]
    fn zero_gains_reduce_to_open_loop() {
        let kinds = [DisturbanceKind::AmbientTemp, DisturbanceKind::SolarSouth];
        let m = map(2, 3, 0.5);
        let mut olp = system(&kinds, 3, Mode::Olp, 0.0, &m);
        parametrize(&PolicySpec::new(Mode::Olp, 3, 2), &mut olp, &[1.0; 6]).unwrap();
        let mut adr = system(&kinds, 3, Mode::Adr, 0.0, &m);
        parametrize(&PolicySpec::new(Mode::Adr, 3, 2), &mut adr, &[1.0; 6]).unwrap();
        let n_olp = olp.layout.n_cols();
        let z: Vec<f64> = (0..n_olp).map(|j| (j % 5) as f64 * 0.3).collect();
        let mut z_adr = z.clone();
        z_adr.resize(adr.layout.n_cols(), 0.0);
        let w = [0.3, -0.2, 0.5, -1.0, 0.1, 0.7];
        assert_eq!(olp.rows.len(), adr.rows.len());
        for (a, b) in olp.rows.iter().zip(&adr.rows) {
            assert_eq!(a.name, b.name);
            assert!((a.expr.eval(&z, &w) - b.expr.eval(&z_adr, &w)).abs() < 1e-12, "{}", a.name);
        }
    }

    #[test]
    fn known_residuals_get_no_gain() {
        let kinds = [DisturbanceKind::AmbientTemp, DisturbanceKind::SolarSouth];
        let m = map(2, 3, 0.5);
        let mut sys = system(&kinds, 3, Mode::Adr, 0.0, &m);
        let radius = [1.0, 1.0, 1.0, 0.0, 0.0, 0.0];
        parametrize(&PolicySpec::new(Mode::Adr, 3, 2), &mut sys, &radius).unwrap();
        assert!(sys.layout.feedback.iter().flatten().all(|g| g.w < 3));
        assert!(sys.layout.n_feedback() > 0);
        assert!(parametrize(&PolicySpec::new(Mode::Adr, 3, 2), &mut sys, &[1.0; 5]).is_err());
    }
}
