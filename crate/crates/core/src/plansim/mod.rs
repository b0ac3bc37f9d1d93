//! World simulation and the single-shot / continuous multi-cycle planners.

mod execute;
mod plan;
mod world;

pub use execute::{simulate_execution, simulate_execution_with_spec, ExecutedTrace};
pub use plan::{
    plan_continuous, plan_single, plan_single_spec, ContinuousOutcome, CycleReport, PlanOutcome,
    PlannerConfig,
};
pub use world::{distance_to_box, snapshot_perception, PerceptionSnapshot, VisibleObstacle, World};

use crate::constraints::ScenarioError;
use crate::lfd::LfdError;
use crate::optimize::OptError;
use crate::reproduce::TrackError;
use crate::stl::StlError;

/// Errors from planning and execution.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error(transparent)]
    Stl(#[from] StlError),
    #[error(transparent)]
    Lfd(#[from] LfdError),
    #[error(transparent)]
    Track(#[from] TrackError),
    #[error(transparent)]
    Opt(#[from] OptError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("invalid planner input: {0}")]
    Invalid(&'static str),
}
