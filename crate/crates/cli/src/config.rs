use std::path::{Path, PathBuf};

use clap::ValueEnum;
use drbem_core::compile::{Mode, PolicySpec};
use drbem_core::dist_model::{AmbiguitySpec, BetaAllocation, DisturbanceHistory};
use drbem_core::plant::{
    Actuator, BuildingConfig, BuildingSpec, ComfortConfig, DistrictConfig, DistrictModel, DisturbanceKind,
    MassClass,
};
use drbem_core::sim::{synth_scenario, GeneratorParams, RunOptions, Scenario, HOURS_PER_WEEK};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Cep,
    Olp,
    Adr,
    TunedCep,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Cep => "cep",
            Method::Olp => "olp",
            Method::Adr => "adr",
            Method::TunedCep => "tuned-cep",
        }
    }

    pub fn mode(self) -> Mode {
        match self {
            Method::Olp => Mode::Olp,
            Method::Adr => Mode::Adr,
            Method::Cep | Method::TunedCep => Mode::Cep,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Climate {
    Winter,
    Summer,
}

/// Experiment description. Relative paths are resolved against the
/// directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// District JSON; defaults to one heated zone on a shared hub.
    pub district: Option<PathBuf>,
    /// Directory of `<id>.csv` training histories; synthetic when absent.
    pub history_dir: Option<PathBuf>,
    /// Test-period scenario CSV; synthetic (per seed) when absent.
    pub scenario: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub climate: Climate,
    pub noiseless: bool,
    pub epsilon: f64,
    pub delta_chi: f64,
    pub delta_st: f64,
    /// Cost per Kelvin-hour of comfort slack.
    pub gamma: f64,
    pub horizon: usize,
    pub weeks: usize,
    pub restart_weekly: bool,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    pub allocation: BetaAllocation<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            district: None,
            history_dir: None,
            scenario: None,
            output_dir: PathBuf::from("drbem-out"),
            climate: Climate::Winter,
            noiseless: false,
            epsilon: 0.01,
            delta_chi: 0.01,
            delta_st: 0.01,
            gamma: 1e3,
            horizon: 8,
            weeks: 1,
            restart_weekly: true,
            seeds: vec![1],
            methods: vec![Method::Cep, Method::Olp, Method::Adr],
            allocation: BetaAllocation::Uniform,
        }
    }
}

pub const HEATED: [DisturbanceKind; 3] = [
    DisturbanceKind::AmbientTemp,
    DisturbanceKind::SolarSouth,
    DisturbanceKind::InternalGains,
];

/// One heavy room with radiator, air handling and blinds.
pub fn default_district() -> DistrictConfig {
    let mut spec = BuildingSpec::new(
        "zone",
        1,
        MassClass::Heavy,
        &[Actuator::Radiator, Actuator::Ahu, Actuator::Blinds],
    );
    spec.floor_area_per_room = 336.0;
    DistrictConfig {
        disturbances: HEATED.to_vec(),
        buildings: vec![BuildingConfig {
            spec,
            comfort: ComfortConfig::Profile("winter".into()),
        }],
        hub_scale: None,
        tariff: None,
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::usage(msg)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.district, &mut cfg.history_dir, &mut cfg.scenario].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(usage("epsilon must lie in (0, 1)"));
        }
        for (name, d) in [("delta_chi", self.delta_chi), ("delta_st", self.delta_st)] {
            if !(d > 0.0 && d < 1.0) {
                return Err(usage(format!("{name} must lie in (0, 1)")));
            }
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(usage("gamma must be a non-negative number"));
        }
        if self.horizon == 0 || self.weeks == 0 {
            return Err(usage("horizon and weeks must be positive"));
        }
        if self.seeds.is_empty() || self.methods.is_empty() {
            return Err(usage("need at least one seed and one method"));
        }
        Ok(())
    }

    pub fn generator(&self) -> GeneratorParams {
        let p = match self.climate {
            Climate::Winter => GeneratorParams::winter(),
            Climate::Summer => GeneratorParams::summer(),
        };
        if self.noiseless {
            p.noiseless()
        } else {
            p
        }
    }

    pub fn district_config(&self) -> Result<DistrictConfig, Failure> {
        match &self.district {
            Some(p) => DistrictConfig::from_file(p).map_err(|e| usage(e.to_string())),
            None => Ok(default_district()),
        }
    }

    pub fn policy(&self, method: Method, district: &DistrictModel<f64>) -> PolicySpec {
        let mut spec = PolicySpec::new(method.mode(), self.horizon, district.n_disturbances());
        spec.slack_penalty = self.gamma;
        spec.epsilon = self.epsilon;
        spec
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            weeks: self.weeks,
            restart_weekly: self.restart_weekly,
            allocation: self.allocation.clone(),
            ..Default::default()
        }
    }

    pub fn hours_needed(&self) -> usize {
        self.weeks * HOURS_PER_WEEK + self.horizon.max(24)
    }

    pub fn fit(&self, history: &DisturbanceHistory<f64>, n_disturbances: usize) -> Result<AmbiguitySpec<f64>, Failure> {
        AmbiguitySpec::fit(history, self.delta_chi, self.delta_st, self.epsilon, self.horizon, n_disturbances)
            .map_err(|e| Failure::runtime(format!("{}: {e}", history.disturbance_id)))
    }
}

/// Everything a controller needs for one seed.
pub struct Experiment {
    pub district: DistrictModel<f64>,
    pub scenario: Scenario,
    pub ambiguity: Vec<AmbiguitySpec<f64>>,
}

pub fn read_history(dir: &Path, kind: DisturbanceKind) -> Result<DisturbanceHistory<f64>, Failure> {
    let path = dir.join(format!("{}.csv", kind.id()));
    if !path.exists() {
        return Err(usage(format!("{}: missing history for {}", path.display(), kind.id())));
    }
    DisturbanceHistory::read_csv_file(&path).map_err(|e| usage(e.to_string()))
}

impl Experiment {
    pub fn prepare(cfg: &RunConfig, seed: u64) -> Result<Self, Failure> {
        let district: DistrictModel<f64> = cfg
            .district_config()?
            .build()
            .map_err(|e| usage(e.to_string()))?;
        let kinds = district.disturbances.clone();
        let synthetic = synth_scenario(&cfg.generator(), &kinds, seed, cfg.hours_needed())
            .map_err(|e| Failure::runtime(e.to_string()))?;
        let scenario = match &cfg.scenario {
            Some(p) => {
                let file = std::fs::File::open(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
                Scenario::read_csv(file)
                    .and_then(|s| s.select(&kinds))
                    .map_err(|e| usage(format!("{}: {e}", p.display())))?
            }
            None => synthetic.scenario,
        };
        let histories = match &cfg.history_dir {
            Some(dir) => kinds.iter().map(|k| read_history(dir, *k)).collect::<Result<Vec<_>, _>>()?,
            None => synthetic.training,
        };
        let ambiguity = histories
            .iter()
            .map(|h| cfg.fit(h, kinds.len()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            district,
            scenario,
            ambiguity,
        })
    }
}
