//! Trajectory reproduction: component means become a stepwise reference that
//! an iterative LQR tracks under non-holonomic unicycle kinematics.

mod ilqr;
mod reference;
mod unicycle;

pub use ilqr::{ilqr_track, tracking_cost, TrackerWeights, Trajectory};
pub use reference::{build_reference, ReferencePath};
pub use unicycle::{step_unicycle, ControlInput, KinematicLimits, UnicycleState};

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::stl::StlError;
use crate::trace::Trace;

/// Errors from reference tracking.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrackError {
    #[error("tracking cost diverged to a non-finite value")]
    NonFiniteCost,
    #[error("reference must contain at least one target")]
    EmptyReference,
    #[error("invalid kinematic limits or weights: {0}")]
    BadConfig(&'static str),
}

/// Assembles the evaluation trace: ego channels from the trajectory plus any
/// world channels (obstacle bounds, light phases). Every world series must
/// match the trajectory's sample count.
pub fn trajectory_to_trace(
    traj: &Trajectory,
    world_channels: &BTreeMap<String, Vec<f64>>,
) -> Result<Trace, StlError> {
    let n = traj.states.len();
    let mut trace = Trace::new(traj.dt, n)?;
    trace.insert_channel("ego_x", traj.states.iter().map(|s| s.x).collect())?;
    trace.insert_channel("ego_y", traj.states.iter().map(|s| s.y).collect())?;
    trace.insert_channel("ego_alpha", traj.states.iter().map(|s| s.alpha).collect())?;
    for (name, series) in world_channels {
        if series.len() != n {
            return Err(StlError::BadTrace("world channel length mismatch"));
        }
        trace.insert_channel(name.clone(), series.clone())?;
    }
    Ok(trace)
}
