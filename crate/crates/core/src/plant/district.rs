use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{
    make_building, make_hub, Building, BuildingSpec, ComfortSchedule, DisturbanceKind, Hub,
    PlantError, Tariff,
};
use crate::scalar::Scalar;

/// A comfort profile by name or 24 explicit `[lb, ub]` pairs (null = none).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComfortConfig {
    Profile(String),
    Hours(Vec<[Option<f64>; 2]>),
}

impl Default for ComfortConfig {
    fn default() -> Self {
        ComfortConfig::Profile("winter".into())
    }
}

impl ComfortConfig {
    pub fn to_schedule<S: Scalar>(&self) -> Result<ComfortSchedule<S>, PlantError> {
        let sched = match self {
            ComfortConfig::Profile(name) => match name.as_str() {
                "winter" => ComfortSchedule::winter(),
                "summer" => ComfortSchedule::summer(),
                "commercial" => ComfortSchedule::commercial(),
                "residential" => ComfortSchedule::residential(),
                "none" => ComfortSchedule::unbounded(),
                other => return Err(PlantError::District(format!("unknown comfort profile {other}"))),
            },
            ComfortConfig::Hours(h) => ComfortSchedule {
                bounds: h.iter().map(|[l, u]| (l.map(S::lit), u.map(S::lit))).collect(),
            },
        };
        if !sched.is_valid() {
            return Err(PlantError::District(
                "comfort schedule needs 24 hours with lb ≤ ub".into(),
            ));
        }
        Ok(sched)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingConfig {
    #[serde(flatten)]
    pub spec: BuildingSpec,
    #[serde(default)]
    pub comfort: ComfortConfig,
}

/// JSON description of a district.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistrictConfig {
    pub disturbances: Vec<DisturbanceKind>,
    pub buildings: Vec<BuildingConfig>,
    /// Number of buildings the hub capacities are sized for; defaults to
    /// the number of buildings.
    #[serde(default)]
    pub hub_scale: Option<usize>,
    #[serde(default)]
    pub tariff: Option<Vec<f64>>,
}

impl DistrictConfig {
    pub fn from_json(text: &str) -> Result<Self, PlantError> {
        serde_json::from_str(text).map_err(|e| PlantError::District(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, PlantError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PlantError::District(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("district config serializes")
    }

    pub fn build<S: Scalar>(&self) -> Result<DistrictModel<S>, PlantError> {
        let buildings = self
            .buildings
            .iter()
            .map(|bc| {
                let mut b = make_building(&bc.spec, &self.disturbances)?;
                b.comfort = bc.comfort.to_schedule()?;
                Ok(b)
            })
            .collect::<Result<Vec<_>, PlantError>>()?;
        let scale = self.hub_scale.unwrap_or(buildings.len());
        let hub = make_hub(scale, &self.disturbances)?;
        let tariff = match &self.tariff {
            Some(p) => Tariff {
                price: p.iter().map(|v| S::lit(*v)).collect(),
            },
            None => Tariff::day_night(),
        };
        DistrictModel::new(hub, buildings, tariff, self.disturbances.clone())
    }
}

/// Building and hub device states of a district.
#[derive(Debug, Clone, PartialEq)]
pub struct DistrictState<S> {
    pub buildings: Vec<Array1<S>>,
    pub devices: Vec<Array1<S>>,
}

/// Hub, buildings and tariff sharing one disturbance vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DistrictModel<S> {
    pub hub: Hub<S>,
    pub buildings: Vec<Building<S>>,
    pub tariff: Tariff<S>,
    pub disturbances: Vec<DisturbanceKind>,
}

impl<S: Scalar> DistrictModel<S> {
    pub fn new(
        hub: Hub<S>,
        buildings: Vec<Building<S>>,
        tariff: Tariff<S>,
        disturbances: Vec<DisturbanceKind>,
    ) -> Result<Self, PlantError> {
        if buildings.is_empty() {
            return Err(PlantError::District("district has no buildings".into()));
        }
        if !tariff.is_valid() {
            return Err(PlantError::District("tariff needs 24 positive prices".into()));
        }
        let nd = disturbances.len();
        for b in &buildings {
            if !b.is_consistent() || b.n_disturbances() != nd {
                return Err(PlantError::District(format!("building {} is inconsistent", b.id)));
            }
        }
        for d in &hub.devices {
            if d.f_xi.ncols() != nd || d.c.ncols() != nd {
                return Err(PlantError::District(format!("device {} is inconsistent", d.id)));
            }
            if d.f_u.iter().chain(d.f_x.iter()).chain(d.h.iter()).any(|v| !v.is_finite()) {
                return Err(PlantError::District(format!("device {} has non-finite rows", d.id)));
            }
        }
        Ok(Self {
            hub,
            buildings,
            tariff,
            disturbances,
        })
    }

    pub fn n_disturbances(&self) -> usize {
        self.disturbances.len()
    }

    pub fn initial_state(&self) -> DistrictState<S> {
        DistrictState {
            buildings: self.buildings.iter().map(|b| b.x0.clone()).collect(),
            devices: self.hub.devices.iter().map(|d| d.x0.clone()).collect(),
        }
    }

    pub fn coupling(&self) -> Vec<Array2<S>> {
        self.buildings.iter().map(|b| b.coupling()).collect()
    }

    pub fn disturbance_index(&self, kind: DisturbanceKind) -> Option<usize> {
        self.disturbances.iter().position(|d| *d == kind)
    }
}
