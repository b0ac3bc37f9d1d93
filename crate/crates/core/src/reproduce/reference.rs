//! Stepwise reference construction from the component schedule.

use alloc::vec::Vec;

use crate::lfd::{component_sequence, HsmmModel, LfdError};

use super::unicycle::UnicycleState;

/// Per-step pose targets for the tracker.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePath {
    pub dt: f64,
    pub points: Vec<UnicycleState>,
}

/// Expands the component schedule into one target per step: during a
/// component's stay its mean pose is the target (zero-order hold), switching
/// stepwise at segment boundaries.
pub fn build_reference(
    model: &HsmmModel,
    start: UnicycleState,
    horizon_steps: usize,
) -> Result<ReferencePath, LfdError> {
    let schedule = component_sequence(model, [start.x, start.y, start.alpha], horizon_steps)?;
    let mut points = Vec::with_capacity(horizon_steps);
    for (component, duration) in schedule {
        let m = model.means[component];
        for _ in 0..duration {
            points.push(UnicycleState::new(m[0], m[1], m[2]));
        }
    }
    debug_assert_eq!(points.len(), horizon_steps);
    Ok(ReferencePath {
        dt: model.dt,
        points,
    })
}
