//! Declarative scenarios and their translation into STL formulas and world
//! channels.

mod channels;
mod formulas;
mod types;

pub use channels::{obstacle_channels, obstacle_channels_from};
pub use formulas::{
    build_obstacle_formula, build_road_rule_formula, build_safety_distance_formula,
    build_traffic_light_formula, check_channels, compose_scenario_spec, trivially_true,
};
pub use types::{
    Axis, Goal, ObstacleSpec, Rect, SafetyDistance, Scenario, StartPose, TrafficLightSpec,
};

use alloc::string::String;

/// Errors from scenario validation and formula construction.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("unknown obstacle id `{0}`")]
    UnknownObstacle(String),
    #[error("obstacle list must not be empty")]
    NoObstacles,
    #[error("formula references channel `{0}` that no scenario element produces")]
    UnresolvedChannel(String),
}
