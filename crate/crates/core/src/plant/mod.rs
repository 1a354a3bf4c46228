//! Energy hub devices, bilinear building models and the district that
//! couples them.

mod building;
mod district;
mod hub;
mod schedule;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use building::{
    linearize_building, make_building, simulate_true_step, Actuator, Building, BuildingSpec,
    InputKind, LinearBuilding, MassClass,
};
pub use district::{BuildingConfig, ComfortConfig, DistrictConfig, DistrictModel, DistrictState};
pub use hub::{make_hub, BalanceNode, Device, DeviceKind, Hub};
pub use schedule::{ComfortSchedule, Tariff};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlantError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid building specification: {0}")]
    Spec(String),
    #[error("invalid district: {0}")]
    District(String),
}

/// Exogenous disturbance sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum DisturbanceKind {
    /// Ambient air temperature, °C.
    AmbientTemp,
    /// Ground temperature, °C.
    GroundTemp,
    /// Global radiation on the facade, kW/m².
    SolarNorth,
    SolarEast,
    SolarSouth,
    SolarWest,
    /// Internal heat gains per room, kW.
    InternalGains,
}

impl DisturbanceKind {
    pub const ALL: [DisturbanceKind; 7] = [
        DisturbanceKind::AmbientTemp,
        DisturbanceKind::GroundTemp,
        DisturbanceKind::SolarNorth,
        DisturbanceKind::SolarEast,
        DisturbanceKind::SolarSouth,
        DisturbanceKind::SolarWest,
        DisturbanceKind::InternalGains,
    ];

    pub fn id(self) -> &'static str {
        match self {
            DisturbanceKind::AmbientTemp => "at",
            DisturbanceKind::GroundTemp => "gt",
            DisturbanceKind::SolarNorth => "srn",
            DisturbanceKind::SolarEast => "sre",
            DisturbanceKind::SolarSouth => "srs",
            DisturbanceKind::SolarWest => "srw",
            DisturbanceKind::InternalGains => "ig",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.id() == id)
    }

    pub fn is_solar(self) -> bool {
        matches!(
            self,
            DisturbanceKind::SolarNorth
                | DisturbanceKind::SolarEast
                | DisturbanceKind::SolarSouth
                | DisturbanceKind::SolarWest
        )
    }
}

/// Hub output streams the buildings draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemandStream {
    Electricity,
    Cooling,
    Heating,
}

impl DemandStream {
    pub const ALL: [DemandStream; 3] = [
        DemandStream::Electricity,
        DemandStream::Cooling,
        DemandStream::Heating,
    ];

    pub fn index(self) -> usize {
        match self {
            DemandStream::Electricity => 0,
            DemandStream::Cooling => 1,
            DemandStream::Heating => 2,
        }
    }
}
