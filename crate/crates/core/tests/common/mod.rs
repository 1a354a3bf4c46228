#![allow(dead_code)]

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use drbem_core::compile::{
    AffineInW, CompiledRobustLP, Layout, LinExpr, Mode, PolicySpec, RobustRows, RowKind, SourceRow,
};
use drbem_core::dist_model::{AmbiguitySpec, BetaAllocation};
use drbem_core::lp::{solve, LinearProgram, Sense, SolveOptions};
use drbem_core::plant::{
    Actuator, BuildingConfig, BuildingSpec, ComfortConfig, DistrictConfig, DistrictModel,
    DistrictState, DisturbanceKind, MassClass,
};
use drbem_core::sim::{compile_hour, synth_scenario, GeneratorParams, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const HEATED: [DisturbanceKind; 3] = [
    DisturbanceKind::AmbientTemp,
    DisturbanceKind::SolarSouth,
    DisturbanceKind::InternalGains,
];

/// One-room heavy zone with radiator, AHU and blinds.
pub fn zone(id: &str, comfort: &str) -> BuildingConfig {
    let mut spec = BuildingSpec::new(
        id,
        1,
        MassClass::Heavy,
        &[Actuator::Radiator, Actuator::Ahu, Actuator::Blinds],
    );
    spec.floor_area_per_room = 336.0;
    BuildingConfig {
        spec,
        comfort: ComfortConfig::Profile(comfort.into()),
    }
}

pub fn district(buildings: Vec<BuildingConfig>, kinds: &[DisturbanceKind]) -> DistrictModel<f64> {
    DistrictConfig {
        disturbances: kinds.to_vec(),
        buildings,
        hub_scale: None,
        tariff: None,
    }
    .build()
    .expect("district builds")
}

/// Scenario of `hours` plus a day of look-ahead, and ambiguity fitted to
/// the matching training year.
pub fn fitted(
    params: &GeneratorParams,
    kinds: &[DisturbanceKind],
    seed: u64,
    hours: usize,
    horizon: usize,
) -> (Scenario, Vec<AmbiguitySpec<f64>>) {
    let data = synth_scenario(params, kinds, seed, hours + 24).expect("scenario");
    let amb = data
        .training
        .iter()
        .map(|h| AmbiguitySpec::fit(h, 0.01, 0.01, 0.01, horizon, kinds.len()).expect("fit"))
        .collect();
    (data.scenario, amb)
}

/// Worker count from `DRBEM_THREADS`, else the available parallelism.
pub fn threads() -> usize {
    std::env::var("DRBEM_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|n: &usize| *n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Maps `f` over `items` on a pool of scoped threads, keeping order.
pub fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let out: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..threads().min(items.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                out.lock().unwrap()[i] = Some(r);
            });
        }
    });
    out.into_inner().unwrap().into_iter().map(|r| r.expect("every item mapped")).collect()
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k].abs() < 1e-10 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let m = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= m * a[k][j];
            }
            b[i] -= m * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Some(x)
}

fn dense_rows(lp: &LinearProgram) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![0.0; lp.n_cols()]; lp.n_rows()];
    for t in &lp.triplets {
        rows[t.row][t.col] += t.value;
    }
    rows
}

fn feasible(lp: &LinearProgram, rows: &[Vec<f64>], x: &[f64], tol: f64) -> bool {
    let bounds = x
        .iter()
        .enumerate()
        .all(|(j, v)| *v >= lp.lower[j] - tol && *v <= lp.upper[j] + tol);
    bounds
        && rows.iter().enumerate().all(|(i, a)| {
            let lhs: f64 = a.iter().zip(x).map(|(c, v)| c * v).sum();
            match lp.senses[i] {
                Sense::Le => lhs <= lp.rhs[i] + tol,
                Sense::Ge => lhs >= lp.rhs[i] - tol,
                Sense::Eq => (lhs - lp.rhs[i]).abs() <= tol,
            }
        })
}

fn subsets(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    go(0, n, k, &mut Vec::new(), f);
}

/// Optimal value by enumerating every basic solution; `None` when no vertex
/// is feasible. All column bounds must be finite.
pub fn vertex_optimum(lp: &LinearProgram) -> Option<f64> {
    let n = lp.n_cols();
    let rows = dense_rows(lp);
    let mut planes: Vec<(Vec<f64>, f64)> = rows.iter().cloned().zip(lp.rhs.iter().copied()).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), lp.lower[j]));
        planes.push((e, lp.upper[j]));
    }
    let mut best: Option<f64> = None;
    subsets(planes.len(), n, &mut |idx| {
        let a = idx.iter().map(|&i| planes[i].0.clone()).collect();
        let b = idx.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = solve_dense(a, b) {
            if feasible(lp, &rows, &x, 1e-9) {
                let v = lp.objective_value(&x);
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
    });
    best
}

/// Random LP with up to six bounded columns and up to six rows.
pub fn random_lp(rng: &mut impl Rng) -> LinearProgram {
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(0..=6);
    let mut lp = LinearProgram::new();
    for j in 0..n {
        let lo = -(rng.gen_range(0..=5) as f64);
        let hi = rng.gen_range(0..=5) as f64;
        lp.add_col(format!("x{j}"), rng.gen_range(-3.0..3.0), lo, hi);
    }
    for i in 0..m {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.7) || (j == n - 1 && coeffs.is_empty()) {
                let v = rng.gen_range(1..=5) as f64;
                coeffs.push((j, if rng.gen_bool(0.5) { v } else { -v }));
            }
        }
        let sense = match rng.gen_range(0..10) {
            0 => Sense::Eq,
            1..=5 => Sense::Le,
            _ => Sense::Ge,
        };
        lp.add_row(format!("r{i}"), &coeffs, sense, rng.gen_range(-6.0..6.0));
    }
    lp
}

/// Rows affine in a few residual coordinates over a box, with the columns
/// they read.
pub struct RobustInstance {
    pub layout: Layout,
    pub n_z: usize,
    pub rows: Vec<SourceRow>,
    pub center: Vec<f64>,
    pub radius: Vec<f64>,
    pub objective: Vec<f64>,
}

fn random_expr(rng: &mut impl Rng, n_z: usize, p: f64, scale: f64) -> LinExpr {
    let mut e = LinExpr::constant(if rng.gen_bool(0.6) { rng.gen_range(-scale..scale) } else { 0.0 });
    for j in 0..n_z {
        if rng.gen_bool(p) {
            e.add_term(j, rng.gen_range(-scale..scale));
        }
    }
    e
}

pub fn random_robust_instance(rng: &mut impl Rng) -> RobustInstance {
    let n_z = rng.gen_range(1..=4);
    let k = rng.gen_range(1..=4);
    let m = rng.gen_range(1..=5);
    let mut layout = Layout::empty(1);
    for j in 0..n_z {
        layout.add_col(format!("z{j}"), -3.0, 3.0);
    }
    let mut rows: Vec<SourceRow> = Vec::new();
    for i in 0..m {
        let mut expr = AffineInW::from_nominal(random_expr(rng, n_z, 0.8, 2.0));
        for j in 0..k {
            if !rng.gen_bool(0.7) {
                continue;
            }
            let g = match rows.last().and_then(|r| r.expr.grad.get(&j)) {
                Some(prev) if rng.gen_bool(0.3) => prev.scaled(rng.gen_range(-2.0..2.0)),
                _ => random_expr(rng, n_z, 0.5, 1.0),
            };
            if !g.is_zero() {
                expr.add_grad(j, &g);
            }
        }
        let sense = if rng.gen_bool(0.1) { Sense::Eq } else { Sense::Le };
        rows.push(SourceRow {
            name: format!("r{i}"),
            kind: RowKind::BuildingLimit,
            sense,
            expr,
        });
    }
    let center = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let radius = (0..k)
        .map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..1.0) })
        .collect();
    let objective = (0..n_z).map(|_| rng.gen_range(-1.0..1.0)).collect();
    RobustInstance {
        layout,
        n_z,
        rows,
        center,
        radius,
        objective,
    }
}

pub fn vertices(center: &[f64], radius: &[f64]) -> Vec<Vec<f64>> {
    (0..1usize << center.len())
        .map(|mask| {
            center
                .iter()
                .zip(radius)
                .enumerate()
                .map(|(j, (c, r))| if mask >> j & 1 == 1 { c + r } else { c - r })
                .collect()
        })
        .collect()
}

/// Adds a row unless it has no columns; `false` if such a row fails.
fn push_row(lp: &mut LinearProgram, name: String, coeffs: &[(usize, f64)], sense: Sense, rhs: f64) -> bool {
    if coeffs.iter().any(|(_, v)| *v != 0.0) {
        lp.add_row(name, coeffs, sense, rhs);
        return true;
    }
    match sense {
        Sense::Le => rhs >= 0.0,
        Sense::Ge => rhs <= 0.0,
        Sense::Eq => rhs == 0.0,
    }
}

/// The counterpart as an LP over the original and auxiliary columns;
/// `None` when a row without columns already fails.
pub fn counterpart_lp(inst: &RobustInstance, robust: &RobustRows, layout: &Layout) -> Option<LinearProgram> {
    let mut lp = LinearProgram::new();
    for j in 0..layout.n_cols() {
        let c = inst.objective.get(j).copied().unwrap_or(0.0);
        lp.add_col(layout.names[j].clone(), c, layout.lower[j], layout.upper[j]);
    }
    for r in &robust.rows {
        if !push_row(&mut lp, r.name.clone(), &r.coeffs, r.sense, r.rhs) {
            return None;
        }
    }
    Some(lp)
}

/// Every row written out at every vertex of the box.
pub fn vertex_lp(inst: &RobustInstance) -> Option<LinearProgram> {
    let mut lp = LinearProgram::new();
    for j in 0..inst.n_z {
        lp.add_col(format!("z{j}"), inst.objective[j], -3.0, 3.0);
    }
    for (vi, w) in vertices(&inst.center, &inst.radius).iter().enumerate() {
        for r in &inst.rows {
            let mut e = r.expr.nominal.clone();
            for (j, g) in &r.expr.grad {
                e.add_scaled(w[*j], g);
            }
            if !push_row(&mut lp, format!("{}.v{vi}", r.name), &e.terms, r.sense, -e.constant) {
                return None;
            }
        }
    }
    Some(lp)
}

/// Whether an optional LP has a feasible point, and its optimum if so.
pub fn lp_optimum(lp: Option<LinearProgram>) -> Option<f64> {
    let s = drbem_core::lp::solve(&lp?, &Default::default()).expect("valid LP");
    match s.status {
        drbem_core::lp::Status::Optimal => Some(s.objective),
        drbem_core::lp::Status::Infeasible => None,
        other => panic!("unexpected status {other:?}"),
    }
}

/// Worst left-hand side of the counterpart rows at `z`, with every
/// auxiliary at its smallest feasible value. Equality rows are skipped.
pub fn counterpart_worst(robust: &RobustRows, layout: &Layout, n_z: usize, z: &[f64]) -> Vec<(String, f64)> {
    let mut full = z.to_vec();
    full.resize(layout.n_cols(), 0.0);
    for r in robust.rows.iter().filter(|r| r.kind == RowKind::AbsAux) {
        let (y, rest): (Vec<_>, Vec<_>) = r.coeffs.iter().partition(|(c, _)| *c >= n_z);
        let need = rest.iter().map(|(c, v)| v * z[*c]).sum::<f64>() - r.rhs;
        let col = y[0].0;
        full[col] = full[col].max(need);
    }
    robust
        .rows
        .iter()
        .filter(|r| r.kind != RowKind::AbsAux && r.sense == Sense::Le)
        .map(|r| (r.name.clone(), r.coeffs.iter().map(|(c, v)| v * full[*c]).sum::<f64>() - r.rhs))
        .collect()
}

pub struct Instance {
    pub district: DistrictModel<f64>,
    pub scenario: Scenario,
    pub ambiguity: Vec<AmbiguitySpec<f64>>,
    pub state: DistrictState<f64>,
    pub hour: usize,
}

/// One-zone district at a random hour and shifted initial temperature,
/// ambiguity fitted for a horizon of up to 8.
pub fn instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let district = district(vec![zone("b", "winter")], &HEATED);
    let (scenario, ambiguity) = fitted(&GeneratorParams::winter(), &HEATED, seed, 48, 8);
    let mut state = district.initial_state();
    let shift = rng.gen_range(-1.5..1.5);
    state.buildings[0].mapv_inplace(|x| x + shift);
    Instance {
        district,
        scenario,
        ambiguity,
        state,
        hour: rng.gen_range(0..40),
    }
}

pub fn compiled(inst: &Instance, mode: Mode, horizon: usize) -> CompiledRobustLP {
    compile_hour(
        &inst.district,
        &PolicySpec::new(mode, horizon, HEATED.len()),
        &inst.ambiguity,
        &inst.scenario,
        &inst.state,
        inst.hour,
        &BetaAllocation::Uniform,
    )
    .unwrap()
}

pub fn tau(c: &CompiledRobustLP) -> f64 {
    let s = solve(&c.lp, &SolveOptions::default()).unwrap();
    assert!(s.is_optimal(), "{:?}", s.status);
    s.x[c.tau]
}
