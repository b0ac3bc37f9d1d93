//! Executes a planned trajectory against the true world and monitors it.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::world::{distance_to_box, World};
use super::PlanError;
use crate::constraints::compose_scenario_spec;
use crate::num;
use crate::reproduce::{trajectory_to_trace, Trajectory};
use crate::stl::{robustness, Formula};
use crate::trace::Trace;

/// A trajectory as actually executed: the evaluation trace over true world
/// channels, per-step obstacle distances, collisions, and the classical
/// robustness of the composed scenario formula.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecutedTrace {
    pub trace: Trace,
    /// Per obstacle id: distance to the inflated true footprint at each step
    /// (zero means contact, i.e. a collision).
    pub distances: BTreeMap<String, Vec<f64>>,
    pub collisions: Vec<(String, usize)>,
    pub final_robustness: f64,
}

impl ExecutedTrace {
    pub fn min_distance(&self, id: &str) -> Option<f64> {
        self.distances
            .get(id)
            .map(|d| d.iter().copied().fold(f64::INFINITY, f64::min))
    }
}

/// Steps the world clock alongside the trajectory, recording per-step
/// distances against true obstacle positions (not extrapolations), flagging
/// collisions, and evaluating the composed scenario formula on the executed
/// trace under classical semantics.
pub fn simulate_execution(world: &World, traj: &Trajectory) -> Result<ExecutedTrace, PlanError> {
    let spec = compose_scenario_spec(&world.scenario)?;
    simulate_execution_with_spec(world, traj, &spec)
}

/// As [`simulate_execution`], but scoring an explicit formula instead of the
/// scenario's composed one (used with spec overrides).
pub fn simulate_execution_with_spec(
    world: &World,
    traj: &Trajectory,
    spec: &Formula,
) -> Result<ExecutedTrace, PlanError> {
    let s = &world.scenario;
    if num::abs(traj.dt - s.dt) > 1e-12 {
        return Err(PlanError::Invalid("trajectory dt must match scenario dt"));
    }
    let n = traj.states.len();

    // true per-step world channels
    let mut channels: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut distances: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut collisions = Vec::new();
    for o in &s.obstacles {
        let mut xlb = Vec::with_capacity(n);
        let mut xub = Vec::with_capacity(n);
        let mut ylb = Vec::with_capacity(n);
        let mut yub = Vec::with_capacity(n);
        let mut xc = Vec::with_capacity(n);
        let mut yc = Vec::with_capacity(n);
        let mut dist = Vec::with_capacity(n);
        for (k, state) in traj.states.iter().enumerate() {
            let t = world.clock + k as f64 * s.dt;
            let b = o.box_at(t);
            let inflated = b.inflated(o.inflation);
            xlb.push(inflated.x_lb);
            xub.push(inflated.x_ub);
            ylb.push(inflated.y_lb);
            yub.push(inflated.y_ub);
            let (cx, cy) = b.center();
            xc.push(cx);
            yc.push(cy);
            let d = distance_to_box((state.x, state.y), &inflated);
            if d == 0.0 {
                collisions.push((o.id.clone(), k));
            }
            dist.push(d);
        }
        channels.insert(format!("{}_xlb", o.id), xlb);
        channels.insert(format!("{}_xub", o.id), xub);
        channels.insert(format!("{}_ylb", o.id), ylb);
        channels.insert(format!("{}_yub", o.id), yub);
        channels.insert(format!("{}_xc", o.id), xc);
        channels.insert(format!("{}_yc", o.id), yc);
        distances.insert(o.id.clone(), dist);
    }
    for (i, tl) in s.traffic_lights.iter().enumerate() {
        let series: Vec<f64> = (0..n)
            .map(|k| {
                let t = world.clock + k as f64 * s.dt;
                if t >= tl.red_interval.0 && t < tl.red_interval.1 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        channels.insert(format!("light{i}_red"), series);
    }

    let trace = trajectory_to_trace(traj, &channels)?;
    let final_robustness = robustness(spec, &trace, 0)?;
    Ok(ExecutedTrace {
        trace,
        distances,
        collisions,
        final_robustness,
    })
}
