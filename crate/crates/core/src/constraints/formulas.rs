//! Scenario elements as STL formulas.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::types::{Axis, ObstacleSpec, Rect, SafetyDistance, Scenario, TrafficLightSpec};
use super::ScenarioError;
use crate::stl::{Atom, BoundSource, CmpOp, Formula, Interval, LinExpr};

/// A formula that is satisfied by construction (constant margin 1e6). Keeps
/// conjunctions total without special cases; reads `ego_x` so every trace
/// resolves it.
pub fn trivially_true() -> Formula {
    Formula::Atom(Atom::Cmp {
        expr: LinExpr {
            terms: alloc::vec![(0.0, String::from("ego_x"))],
            constant: 0.0,
        },
        op: CmpOp::Gt,
        bound: -1e6,
    })
}

fn in_box_channels(id: &str) -> Atom {
    Atom::InBox {
        x_chan: "ego_x".into(),
        y_chan: "ego_y".into(),
        x_lb: BoundSource::Channel(format!("{id}_xlb")),
        x_ub: BoundSource::Channel(format!("{id}_xub")),
        y_lb: BoundSource::Channel(format!("{id}_ylb")),
        y_ub: BoundSource::Channel(format!("{id}_yub")),
    }
}

fn in_box_const(r: &Rect) -> Atom {
    Atom::InBox {
        x_chan: "ego_x".into(),
        y_chan: "ego_y".into(),
        x_lb: BoundSource::Const(r.x_lb),
        x_ub: BoundSource::Const(r.x_ub),
        y_lb: BoundSource::Const(r.y_lb),
        y_ub: BoundSource::Const(r.y_ub),
    }
}

/// `G_window !in_box(...)` per obstacle, conjoined in list order. Bounds are
/// channel-valued, which realizes the per-timestep expansion for moving
/// obstacles.
pub fn build_obstacle_formula(
    obstacles: &[ObstacleSpec],
    window: Interval,
) -> Result<Formula, ScenarioError> {
    let parts = obstacles
        .iter()
        .map(|o| Formula::globally(window, Formula::not(Formula::Atom(in_box_channels(&o.id)))));
    Formula::conjunction(parts).ok_or(ScenarioError::NoObstacles)
}

/// Forbidden regions as constant-bound avoidance; the empty list yields the
/// trivially-true formula.
pub fn build_road_rule_formula(regions: &[Rect], window: Interval) -> Formula {
    Formula::conjunction(
        regions
            .iter()
            .map(|r| Formula::globally(window, Formula::not(Formula::Atom(in_box_const(r))))),
    )
    .unwrap_or_else(trivially_true)
}

/// `F_window` over the center-relative distance atom on the chosen axis.
pub fn build_safety_distance_formula(
    sd: &SafetyDistance,
    obstacles: &[ObstacleSpec],
) -> Result<Formula, ScenarioError> {
    if !obstacles.iter().any(|o| o.id == sd.obstacle) {
        return Err(ScenarioError::UnknownObstacle(sd.obstacle.clone()));
    }
    let (obs_chan, ego_chan) = match sd.axis {
        Axis::X => (format!("{}_xc", sd.obstacle), "ego_x"),
        Axis::Y => (format!("{}_yc", sd.obstacle), "ego_y"),
    };
    let window = Interval::new(sd.window.0, sd.window.1)
        .map_err(|e| ScenarioError::Invalid(format!("safety distance window: {e}")))?;
    let atom = Atom::Cmp {
        expr: LinExpr::difference(obs_chan, ego_chan),
        op: sd.op,
        bound: sd.bound,
    };
    Ok(Formula::eventually(window, Formula::Atom(atom)))
}

/// `(!in_box(avoid)) U_[t1,t2] (in_box(stay))`.
pub fn build_traffic_light_formula(tl: &TrafficLightSpec) -> Result<Formula, ScenarioError> {
    let window = Interval::new(tl.red_interval.0, tl.red_interval.1)
        .map_err(|e| ScenarioError::Invalid(format!("red interval: {e}")))?;
    Ok(Formula::until(
        window,
        Formula::not(Formula::Atom(in_box_const(&tl.avoid))),
        Formula::Atom(in_box_const(&tl.stay)),
    ))
}

/// Conjunction of every scenario element over `[0, horizon_t]`, in the
/// stable order: obstacles, road rules, safety distances, traffic lights.
pub fn compose_scenario_spec(s: &Scenario) -> Result<Formula, ScenarioError> {
    let window = Interval::new(0.0, s.horizon_t)
        .map_err(|e| ScenarioError::Invalid(format!("horizon: {e}")))?;
    let mut parts: Vec<Formula> = Vec::new();
    if !s.obstacles.is_empty() {
        parts.push(build_obstacle_formula(&s.obstacles, window)?);
    }
    if !s.road_rule_regions.is_empty() {
        parts.push(build_road_rule_formula(&s.road_rule_regions, window));
    }
    for sd in &s.safety_distances {
        parts.push(build_safety_distance_formula(sd, &s.obstacles)?);
    }
    for tl in &s.traffic_lights {
        parts.push(build_traffic_light_formula(tl)?);
    }
    Ok(Formula::conjunction(parts).unwrap_or_else(trivially_true))
}

/// Statically checks that every channel a formula reads is either an ego
/// channel or is produced by one of the given obstacles.
pub fn check_channels(f: &Formula, obstacles: &[ObstacleSpec]) -> Result<(), ScenarioError> {
    let mut available: BTreeSet<String> = ["ego_x", "ego_y", "ego_alpha"]
        .iter()
        .map(|s| String::from(*s))
        .collect();
    for o in obstacles {
        for suffix in ["xlb", "xub", "ylb", "yub", "xc", "yc"] {
            available.insert(format!("{}_{suffix}", o.id));
        }
    }
    for chan in f.channels() {
        if !available.contains(&chan) {
            return Err(ScenarioError::UnresolvedChannel(chan));
        }
    }
    Ok(())
}
