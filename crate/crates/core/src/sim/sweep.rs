use serde::{Deserialize, Serialize};

use super::{run_receding_horizon, RunOptions, Scenario, SimError, HOURS_PER_WEEK};
use crate::compile::{Mode, PolicySpec};
use crate::dist_model::AmbiguitySpec;
use crate::plant::DistrictModel;

/// One point of the cost / violation / solve-time versus horizon curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub method: String,
    pub horizon: usize,
    pub cost_per_week: f64,
    pub kh_per_week: f64,
    pub mean_solve_seconds: f64,
}

/// Closed-loop runs for every method and horizon over the hours selected by
/// `opts`; cost and violations are scaled to one week.
pub fn horizon_sweep(
    district: &DistrictModel<f64>,
    ambiguity: &[AmbiguitySpec<f64>],
    scenario: &Scenario,
    modes: &[Mode],
    horizons: &[usize],
    opts: &RunOptions,
) -> Result<Vec<SweepPoint>, SimError> {
    let mut out = Vec::new();
    for &mode in modes {
        for &horizon in horizons {
            let spec = PolicySpec::new(mode, horizon, district.n_disturbances());
            let trace = run_receding_horizon(district, &spec, ambiguity, scenario, opts)?;
            let scale = HOURS_PER_WEEK as f64 / trace.records.len().max(1) as f64;
            out.push(SweepPoint {
                method: mode.name().into(),
                horizon,
                cost_per_week: trace.total_cost() * scale,
                kh_per_week: trace.total_violation() * scale,
                mean_solve_seconds: trace.mean_solve_seconds(),
            });
        }
    }
    Ok(out)
}

/// Long-format CSV, one row per point.
pub fn write_sweep_csv(points: &[SweepPoint], writer: impl std::io::Write) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(writer);
    for p in points {
        w.serialize(p).map_err(|e| SimError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| SimError::Io(e.to_string()))
}
