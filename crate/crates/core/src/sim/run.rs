use std::time::{Duration, Instant};

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use super::{Scenario, SimError};
use crate::compile::{compile, CompiledRobustLP, FirstStep, Mode, PolicySpec};
use crate::dist_model::{
    build_box, stack_disturbance, AmbiguitySpec, BetaAllocation, MeanBox, STEPS_PER_DAY,
};
use crate::lp::{solve, SolveOptions};
use crate::plant::{simulate_true_step, DeviceKind, DistrictModel, DistrictState};

pub const HOURS_PER_WEEK: usize = 168;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub weeks: usize,
    /// Stops after this many hours instead of `weeks` full weeks.
    pub hours: Option<usize>,
    pub restart_weekly: bool,
    pub allocation: BetaAllocation<f64>,
    pub time_limit: Option<Duration>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            weeks: 1,
            hours: None,
            restart_weekly: true,
            allocation: BetaAllocation::Uniform,
            time_limit: None,
        }
    }
}

/// What happened between hour `hour` and `hour + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourRecord {
    pub hour: usize,
    /// Building states at the end of the hour.
    pub building_states: Vec<Vec<f64>>,
    pub device_states: Vec<Vec<f64>>,
    pub building_inputs: Vec<Vec<f64>>,
    pub blinds: Vec<Vec<f64>>,
    pub hub_inputs: Vec<Vec<f64>>,
    pub grid: f64,
    pub planned_grid: f64,
    pub cost: f64,
    /// Per-room comfort violation of the end-of-hour temperature, K.
    pub violations: Vec<Vec<f64>>,
    /// Largest thermal balance mismatch after applying the inputs.
    pub balance_residual: f64,
    pub fallback: bool,
    pub solve_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeekSummary {
    pub week: usize,
    pub cost: f64,
    pub violation_kh: f64,
    pub fallbacks: usize,
    pub solve_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub method: String,
    pub comfort_tightening: f64,
    pub records: Vec<HourRecord>,
    pub weeks: Vec<WeekSummary>,
    /// `(hour, reason)` for every hour that fell back to the previous input.
    pub failures: Vec<(usize, String)>,
}

impl SimulationTrace {
    pub fn total_cost(&self) -> f64 {
        self.weeks.iter().map(|w| w.cost).sum()
    }

    pub fn total_violation(&self) -> f64 {
        self.weeks.iter().map(|w| w.violation_kh).sum()
    }

    pub fn mean_solve_seconds(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().map(|r| r.solve_seconds).sum::<f64>() / self.records.len() as f64
    }

    /// Fraction of (hour, room) pairs with a positive violation.
    pub fn violation_frequency(&self) -> f64 {
        let (mut hit, mut all) = (0usize, 0usize);
        for r in &self.records {
            for v in r.violations.iter().flatten() {
                all += 1;
                if *v > 1e-9 {
                    hit += 1;
                }
            }
        }
        if all == 0 {
            0.0
        } else {
            hit as f64 / all as f64
        }
    }

    /// One row per hour: `hour,grid,cost,violation,fallback,solve_seconds`
    /// followed by every building state.
    pub fn write_csv(&self, writer: impl std::io::Write) -> Result<(), SimError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = ["method", "hour", "grid", "cost", "violation", "fallback", "solve_seconds"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        if let Some(first) = self.records.first() {
            for (b, x) in first.building_states.iter().enumerate() {
                header.extend((0..x.len()).map(|j| format!("b{b}.x{j}")));
            }
        }
        let io = |e: csv::Error| SimError::Io(e.to_string());
        w.write_record(&header).map_err(io)?;
        for r in &self.records {
            let mut row = vec![
                self.method.clone(),
                r.hour.to_string(),
                r.grid.to_string(),
                r.cost.to_string(),
                r.violations.iter().flatten().sum::<f64>().to_string(),
                u8::from(r.fallback).to_string(),
                r.solve_seconds.to_string(),
            ];
            row.extend(r.building_states.iter().flatten().map(f64::to_string));
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|e| SimError::Io(e.to_string()))
    }
}

fn zero_step(district: &DistrictModel<f64>) -> FirstStep {
    FirstStep {
        building_inputs: district.buildings.iter().map(|b| Array1::zeros(b.input_dim)).collect(),
        blinds: district.buildings.iter().map(|b| Array1::zeros(b.blind_dim)).collect(),
        hub_inputs: district.hub.devices.iter().map(|d| Array1::zeros(d.input_dim)).collect(),
        grid: 0.0,
    }
}

/// The linear program the controller solves at `hour`.
pub fn compile_hour(
    district: &DistrictModel<f64>,
    spec: &PolicySpec,
    ambiguity: &[AmbiguitySpec<f64>],
    scenario: &Scenario,
    state: &DistrictState<f64>,
    hour: usize,
    allocation: &BetaAllocation<f64>,
) -> Result<CompiledRobustLP, SimError> {
    let nd = district.n_disturbances();
    let t_len = spec.horizon;
    if hour + t_len > scenario.hours() {
        return Err(SimError::Scenario(format!("hour {hour} plus horizon {t_len} exceeds the scenario")));
    }
    // The last measured error belongs to the hour that just ended.
    let (current, start_hour) = if hour == 0 {
        (vec![0.0; nd], STEPS_PER_DAY - 1)
    } else {
        (
            (0..nd).map(|i| scenario.error(i, hour - 1)).collect(),
            (hour - 1) % STEPS_PER_DAY,
        )
    };
    let forecasts: Vec<Vec<f64>> = scenario.forecast.iter().map(|f| f[hour..hour + t_len].to_vec()).collect();
    let map = stack_disturbance(&ambiguity.iter().map(|s| &s.model).collect::<Vec<_>>(), &forecasts, &current, start_hour, t_len)?;
    let mut bounds = Vec::with_capacity(nd * t_len);
    for s in ambiguity {
        for h in &map.residual_hours {
            bounds.push(s.bounds[*h]);
        }
    }
    let w_box = build_box(&bounds, allocation, spec.epsilon, t_len, nd)?;
    let mu_box = MeanBox::from_bounds(&bounds);
    Ok(compile(district, spec, &w_box, &mu_box, &map, state, hour)?)
}

/// Compiles and solves the problem for `hour`; a non-optimal status is an
/// error.
pub fn plan_hour(
    district: &DistrictModel<f64>,
    spec: &PolicySpec,
    ambiguity: &[AmbiguitySpec<f64>],
    scenario: &Scenario,
    state: &DistrictState<f64>,
    hour: usize,
    opts: &RunOptions,
) -> Result<FirstStep, SimError> {
    let compiled = compile_hour(district, spec, ambiguity, scenario, state, hour, &opts.allocation)?;
    let sol = solve(
        &compiled.lp,
        &SolveOptions {
            time_limit: opts.time_limit,
            ..SolveOptions::default()
        },
    )?;
    if !sol.is_optimal() {
        return Err(SimError::Solver(format!("{:?}", sol.status)));
    }
    Ok(compiled.first_step(district, &sol.x))
}

/// Largest PV output the realized weather allows.
fn pv_available(district: &DistrictModel<f64>, xi: &Array1<f64>) -> f64 {
    let Some((_, pv)) = district.hub.device(DeviceKind::Photovoltaic) else {
        return 0.0;
    };
    let mut cap = f64::INFINITY;
    for r in 0..pv.n_rows() {
        let a = pv.f_u[[r, 0]];
        if a > 0.0 {
            let slack = pv.h[r] - pv.f_xi.row(r).dot(xi);
            cap = cap.min(slack / a);
        }
    }
    cap.max(0.0)
}

struct Applied {
    next: DistrictState<f64>,
    hub_inputs: Vec<Array1<f64>>,
    grid: f64,
    balance_residual: f64,
}

/// Applies first-step decisions to the true plant for one hour.
fn apply(
    district: &DistrictModel<f64>,
    state: &DistrictState<f64>,
    step: &FirstStep,
    xi: &Array1<f64>,
    hold_battery: bool,
) -> Result<Applied, SimError> {
    let hub = &district.hub;
    let mut hub_inputs = step.hub_inputs.clone();
    if let Some((k, _)) = hub.device(DeviceKind::Photovoltaic) {
        let avail = pv_available(district, xi);
        hub_inputs[k][0] = hub_inputs[k][0].clamp(0.0, avail);
    }
    if hold_battery {
        if let Some((k, _)) = hub.device(DeviceKind::Battery) {
            hub_inputs[k].fill(0.0);
        }
    }
    let mut buildings = Vec::with_capacity(district.buildings.len());
    let mut demand = Array1::<f64>::zeros(3);
    for (b, bld) in district.buildings.iter().enumerate() {
        let u = &step.building_inputs[b];
        buildings.push(simulate_true_step(bld, &state.buildings[b], u, &step.blinds[b], xi)?);
        demand = demand + bld.coupling().dot(u);
    }
    let devices = hub
        .devices
        .iter()
        .enumerate()
        .map(|(k, d)| d.step(&state.devices[k], &hub_inputs[k], xi))
        .collect();
    let u_flat: Vec<f64> = hub_inputs.iter().flatten().copied().collect();
    let d = demand.to_vec();
    let mut grid = 0.0;
    let mut balance_residual: f64 = 0.0;
    for node in &hub.nodes {
        let r = node.residual(&[0.0], &u_flat, &d);
        if node.h_p[0] != 0.0 {
            grid = -r / node.h_p[0];
        } else {
            balance_residual = balance_residual.max(r.abs());
        }
    }
    Ok(Applied {
        next: DistrictState { buildings, devices },
        hub_inputs,
        grid,
        balance_residual,
    })
}

fn room_violations(district: &DistrictModel<f64>, states: &[Array1<f64>], hour: usize) -> Vec<Vec<f64>> {
    district
        .buildings
        .iter()
        .zip(states)
        .map(|(b, x)| b.room_violations(hour, x))
        .collect()
}

/// Closed-loop simulation: plan every hour, apply the first step to the
/// bilinear plant, log what happened.
pub fn run_receding_horizon(
    district: &DistrictModel<f64>,
    spec: &PolicySpec,
    ambiguity: &[AmbiguitySpec<f64>],
    scenario: &Scenario,
    opts: &RunOptions,
) -> Result<SimulationTrace, SimError> {
    spec.validate()?;
    scenario.validate()?;
    if scenario.disturbances != district.disturbances {
        return Err(SimError::Scenario("scenario and district list different disturbances".into()));
    }
    if ambiguity.len() != district.n_disturbances() {
        return Err(SimError::Scenario(format!(
            "{} ambiguity specs for {} disturbances",
            ambiguity.len(),
            district.n_disturbances()
        )));
    }
    let hours = opts.hours.unwrap_or(opts.weeks * HOURS_PER_WEEK);
    if scenario.hours() < hours + spec.horizon {
        return Err(SimError::Scenario(format!(
            "scenario has {} hours, {hours} hours with horizon {} need {}",
            scenario.hours(),
            spec.horizon,
            hours + spec.horizon
        )));
    }
    let mut state = district.initial_state();
    let mut previous = zero_step(district);
    let mut records = Vec::with_capacity(hours);
    let mut failures = Vec::new();
    for k in 0..hours {
        if opts.restart_weekly && k % HOURS_PER_WEEK == 0 {
            state = district.initial_state();
            previous = zero_step(district);
        }
        let t0 = Instant::now();
        let planned = plan_hour(district, spec, ambiguity, scenario, &state, k, opts);
        let solve_seconds = t0.elapsed().as_secs_f64();
        let (step, fallback) = match planned {
            Ok(s) => (s, false),
            Err(e) => {
                log::warn!("hour {k}: {e}; holding the previous input");
                failures.push((k, e.to_string()));
                (previous.clone(), true)
            }
        };
        let xi = Array1::from_vec(scenario.realized_at(k));
        let applied = apply(district, &state, &step, &xi, fallback)?;
        let price = district.tariff.at(k);
        records.push(HourRecord {
            hour: k,
            building_states: applied.next.buildings.iter().map(|x| x.to_vec()).collect(),
            device_states: applied.next.devices.iter().map(|x| x.to_vec()).collect(),
            building_inputs: step.building_inputs.iter().map(|u| u.to_vec()).collect(),
            blinds: step.blinds.iter().map(|v| v.to_vec()).collect(),
            hub_inputs: applied.hub_inputs.iter().map(|u| u.to_vec()).collect(),
            grid: applied.grid,
            planned_grid: step.grid,
            cost: price * applied.grid,
            violations: room_violations(district, &applied.next.buildings, k + 1),
            balance_residual: applied.balance_residual,
            fallback,
            solve_seconds,
        });
        state = applied.next;
        previous = step;
    }
    let weeks = records
        .chunks(HOURS_PER_WEEK)
        .enumerate()
        .map(|(w, recs)| WeekSummary {
            week: w,
            cost: recs.iter().map(|r| r.cost).sum(),
            violation_kh: recs.iter().flat_map(|r| r.violations.iter().flatten()).sum(),
            fallbacks: recs.iter().filter(|r| r.fallback).count(),
            solve_seconds: recs.iter().map(|r| r.solve_seconds).sum(),
        })
        .collect();
    Ok(SimulationTrace {
        method: spec.mode.name().to_string(),
        comfort_tightening: spec.comfort_tightening,
        records,
        weeks,
        failures,
    })
}

/// Convenience for the common case.
pub fn policy(mode: Mode, horizon: usize, district: &DistrictModel<f64>) -> PolicySpec {
    PolicySpec::new(mode, horizon, district.n_disturbances())
}
