//! Closed-loop evaluation of the controllers against the bilinear plant.

mod report;
mod run;
mod scenario;
mod sweep;
mod tune;

use thiserror::Error;

use crate::compile::CompileError;
use crate::dist_model::DistModelError;
use crate::lp::LpError;
use crate::plant::PlantError;

pub use report::{district_table, mean_std, report, DistrictRow, DistrictTable, MethodSummary, Report};
pub use run::{
    compile_hour, plan_hour, policy, run_receding_horizon, HourRecord, RunOptions, SimulationTrace, WeekSummary,
    HOURS_PER_WEEK,
};
pub use scenario::{synth_scenario, GeneratorParams, NoiseParams, Scenario, SyntheticData};
pub use sweep::{horizon_sweep, write_sweep_csv, SweepPoint};
pub use tune::{tune_cep, TunedCep, MAX_TIGHTENING, TIGHTENING_STEP};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Model(#[from] DistModelError),
    #[error(transparent)]
    Plant(#[from] PlantError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("solver returned {0}")]
    Solver(String),
    #[error("tightening cannot reach {target} Kh (still {achieved} Kh at the largest value)")]
    NotAttainable { target: f64, achieved: f64 },
    #[error("i/o: {0}")]
    Io(String),
}
