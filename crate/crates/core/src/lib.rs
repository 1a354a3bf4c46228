//! Distributionally robust energy management for building districts.
//!
//! The crate learns disturbance uncertainty from historical forecasts,
//! compiles multistage energy-hub problems into linear programs under
//! certainty-equivalent, open-loop and affine-decision-rule policies, and
//! evaluates the resulting controllers in closed loop against bilinear
//! building models.

pub mod compile;
pub mod dist_model;
pub mod linalg;
pub mod lp;
pub mod plant;
pub mod scalar;
pub mod sim;

pub use scalar::Scalar;

pub type ArModel = dist_model::ArModel<f64>;
pub type AmbiguityBounds = dist_model::AmbiguityBounds<f64>;
pub type AmbiguitySpec = dist_model::AmbiguitySpec<f64>;
pub type DisturbanceHistory = dist_model::DisturbanceHistory<f64>;
pub type UncertaintyBox = dist_model::UncertaintyBox<f64>;
pub type MeanBox = dist_model::MeanBox<f64>;
pub type StackedDisturbanceMap = dist_model::StackedDisturbanceMap<f64>;
pub type Building = plant::Building<f64>;
pub type Device = plant::Device<f64>;
pub type DistrictModel = plant::DistrictModel<f64>;

pub type ArModel32 = dist_model::ArModel<f32>;
pub type DisturbanceHistory32 = dist_model::DisturbanceHistory<f32>;
pub type Building32 = plant::Building<f32>;
