use super::{run_receding_horizon, RunOptions, Scenario, SimError, SimulationTrace};
use crate::compile::{Mode, PolicySpec};
use crate::dist_model::AmbiguitySpec;
use crate::plant::DistrictModel;

/// Largest tightening tried, °C, and the search resolution.
pub const MAX_TIGHTENING: f64 = 3.0;
pub const TIGHTENING_STEP: f64 = 0.01;

#[derive(Debug, Clone)]
pub struct TunedCep {
    pub comfort_tightening: f64,
    pub trace: SimulationTrace,
    /// Every `(c_b, Kh)` pair evaluated, in order.
    pub evaluations: Vec<(f64, f64)>,
}

/// Smallest tightening on the 0.01 °C grid whose certainty-equivalent
/// closed loop violates comfort by at most `target_kh` over the run,
/// assuming violations fall as the tightening grows. Horizon, penalty and
/// budget come from `base`; its mode and tightening are overridden.
pub fn tune_cep(
    district: &DistrictModel<f64>,
    base: &PolicySpec,
    ambiguity: &[AmbiguitySpec<f64>],
    scenario: &Scenario,
    opts: &RunOptions,
    target_kh: f64,
) -> Result<TunedCep, SimError> {
    let steps = (MAX_TIGHTENING / TIGHTENING_STEP).round() as usize;
    let mut evaluations = Vec::new();
    let mut run = |i: usize| -> Result<SimulationTrace, SimError> {
        let mut spec = PolicySpec {
            mode: Mode::Cep,
            ..base.clone()
        };
        spec.comfort_tightening = i as f64 * TIGHTENING_STEP;
        let mut trace = run_receding_horizon(district, &spec, ambiguity, scenario, opts)?;
        trace.method = "tuned-cep".into();
        evaluations.push((spec.comfort_tightening, trace.total_violation()));
        Ok(trace)
    };
    let ok = |t: &SimulationTrace| t.total_violation() <= target_kh;
    let first = run(0)?;
    if ok(&first) {
        return Ok(TunedCep {
            comfort_tightening: 0.0,
            trace: first,
            evaluations,
        });
    }
    let mut best = run(steps)?;
    if !ok(&best) {
        return Err(SimError::NotAttainable {
            target: target_kh,
            achieved: best.total_violation(),
        });
    }
    let (mut lo, mut hi) = (0usize, steps);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        let t = run(mid)?;
        if ok(&t) {
            hi = mid;
            best = t;
        } else {
            lo = mid;
        }
    }
    Ok(TunedCep {
        comfort_tightening: hi as f64 * TIGHTENING_STEP,
        trace: best,
        evaluations,
    })
}
