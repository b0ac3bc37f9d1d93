//! Scenario data model. The JSON schema mirrors these types field for field
//! (snake_case keys, SI units); unknown keys are rejected.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::ScenarioError;
use crate::num;
use crate::stl::CmpOp;

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x_lb: f64,
    pub x_ub: f64,
    pub y_lb: f64,
    pub y_ub: f64,
}

impl Rect {
    pub fn new(x_lb: f64, x_ub: f64, y_lb: f64, y_ub: f64) -> Result<Self, ScenarioError> {
        let r = Self {
            x_lb,
            x_ub,
            y_lb,
            y_ub,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.x_lb < self.x_ub) || !(self.y_lb < self.y_ub) {
            return Err(ScenarioError::Invalid(
                "rectangle bounds must satisfy lb < ub".into(),
            ));
        }
        Ok(())
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.x_lb + self.x_ub) / 2.0, (self.y_lb + self.y_ub) / 2.0)
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Rect {
        Rect {
            x_lb: self.x_lb + dx,
            x_ub: self.x_ub + dx,
            y_lb: self.y_lb + dy,
            y_ub: self.y_ub + dy,
        }
    }

    pub fn inflated(&self, margin: f64) -> Rect {
        Rect {
            x_lb: self.x_lb - margin,
            x_ub: self.x_ub + margin,
            y_lb: self.y_lb - margin,
            y_ub: self.y_ub + margin,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_lb && x <= self.x_ub && y >= self.y_lb && y <= self.y_ub
    }

    pub fn overlaps(&self, other: &Rect) -> bool {
        self.x_lb <= other.x_ub
            && other.x_lb <= self.x_ub
            && self.y_lb <= other.y_ub
            && other.y_lb <= self.y_ub
    }
}

/// A static or constant-velocity obstacle; `box0` is its footprint at t = 0.
/// Inflation widens the footprint to absorb the ego's half-width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleSpec {
    pub id: String,
    #[serde(rename = "box")]
    pub box0: Rect,
    #[serde(default)]
    pub velocity: (f64, f64),
    #[serde(default)]
    pub inflation: f64,
}

impl ObstacleSpec {
    /// True (uninflated) footprint at absolute time `t`.
    pub fn box_at(&self, t: f64) -> Rect {
        self.box0
            .translated(self.velocity.0 * t, self.velocity.1 * t)
    }

    pub fn is_static(&self) -> bool {
        self.velocity.0 == 0.0 && self.velocity.1 == 0.0
    }
}

/// A junction region to avoid while the light is red, and the waiting region
/// that discharges the obligation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficLightSpec {
    pub avoid: Rect,
    pub stay: Rect,
    /// `(t1, t2)` seconds during which the light is red.
    pub red_interval: (f64, f64),
}

/// Which coordinate a safety-distance bound constrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
}

/// Center-relative distance obligation against one obstacle, active inside a
/// time window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SafetyDistance {
    pub obstacle: String,
    pub axis: Axis,
    pub bound: f64,
    /// `(lo, hi)` seconds.
    pub window: (f64, f64),
    /// `<` demands the ego eventually gets at least this close (approach);
    /// `>` demands it stays at least this far (keep-away).
    #[serde(default = "default_op", with = "op_serde")]
    pub op: CmpOp,
}

fn default_op() -> CmpOp {
    CmpOp::Lt
}

mod op_serde {
    use super::CmpOp;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(op: &CmpOp, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(match op {
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
        })
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CmpOp, D::Error> {
        let text = alloc::string::String::deserialize(d)?;
        match text.as_str() {
            "<" => Ok(CmpOp::Lt),
            ">" => Ok(CmpOp::Gt),
            other => Err(serde::de::Error::custom(alloc::format!(
                "safety distance op must be `<` or `>`, got `{other}`"
            ))),
        }
    }
}

/// Start pose of the ego vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartPose {
    pub x: f64,
    pub y: f64,
    pub alpha: f64,
}

/// Goal disc, used for reporting and plots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Goal {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

/// Declarative environment and task description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub map_bounds: Rect,
    pub start: StartPose,
    pub goal: Goal,
    pub horizon_t: f64,
    pub dt: f64,
    #[serde(default)]
    pub obstacles: Vec<ObstacleSpec>,
    #[serde(default)]
    pub road_rule_regions: Vec<Rect>,
    #[serde(default)]
    pub traffic_lights: Vec<TrafficLightSpec>,
    #[serde(default)]
    pub safety_distances: Vec<SafetyDistance>,
}

impl Scenario {
    /// Number of simulation steps over the horizon.
    pub fn horizon_steps(&self) -> usize {
        num::round(self.horizon_t / self.dt) as usize
    }

    /// Structural validation; returns advisory warnings (the caller decides
    /// how to surface them).
    pub fn validate(&self) -> Result<Vec<String>, ScenarioError> {
        let mut warnings = Vec::new();
        self.map_bounds.validate()?;
        if !(self.dt > 0.0) || !(self.horizon_t > 0.0) {
            return Err(ScenarioError::Invalid(
                "dt and horizon_t must be positive".into(),
            ));
        }
        let steps = self.horizon_t / self.dt;
        if num::abs(steps - num::round(steps)) > 1e-6 {
            return Err(ScenarioError::Invalid(
                "horizon_t must be an integer multiple of dt".into(),
            ));
        }
        if !self.map_bounds.contains(self.start.x, self.start.y) {
            return Err(ScenarioError::Invalid("start outside map bounds".into()));
        }
        if !self.map_bounds.contains(self.goal.x, self.goal.y) {
            return Err(ScenarioError::Invalid("goal outside map bounds".into()));
        }
        let mut seen = alloc::collections::BTreeSet::new();
        for o in &self.obstacles {
            o.box0.validate()?;
            if !seen.insert(o.id.as_str()) {
                return Err(ScenarioError::Invalid(format!(
                    "duplicate obstacle id `{}`",
                    o.id
                )));
            }
            if o.inflation < 0.0 {
                return Err(ScenarioError::Invalid("inflation must be >= 0".into()));
            }
        }
        for r in &self.road_rule_regions {
            r.validate()?;
        }
        for tl in &self.traffic_lights {
            tl.avoid.validate()?;
            tl.stay.validate()?;
            if !(tl.red_interval.0 < tl.red_interval.1) {
                return Err(ScenarioError::Invalid(
                    "red interval must satisfy t1 < t2".into(),
                ));
            }
            if tl.avoid.overlaps(&tl.stay) {
                return Err(ScenarioError::Invalid(
                    "traffic light avoid and stay regions must be disjoint".into(),
                ));
            }
        }
        for sd in &self.safety_distances {
            if !self.obstacles.iter().any(|o| o.id == sd.obstacle) {
                return Err(ScenarioError::UnknownObstacle(sd.obstacle.clone()));
            }
            if !(sd.window.0 <= sd.window.1) || sd.window.0 < 0.0 {
                return Err(ScenarioError::Invalid(
                    "safety distance window must satisfy 0 <= lo <= hi".into(),
                ));
            }
        }
        // sampled collision checks need steps finer than the thinnest obstacle
        let max_speed: f64 = self
            .obstacles
            .iter()
            .map(|o| num::hypot(o.velocity.0, o.velocity.1))
            .fold(0.0, f64::max);
        let min_thickness: f64 = self
            .obstacles
            .iter()
            .map(|o| (o.box0.x_ub - o.box0.x_lb).min(o.box0.y_ub - o.box0.y_lb))
            .fold(f64::INFINITY, f64::min);
        if !self.obstacles.is_empty() {
            let worst_motion = (max_speed + 2.0) * self.dt; // ~2 m/s ego allowance
            if worst_motion >= min_thickness {
                warnings.push(format!(
                    "dt = {} may step across the thinnest obstacle ({} m) at relative speed {} m/s; collisions could be missed",
                    self.dt, min_thickness, max_speed + 2.0
                ));
            }
        }
        Ok(warnings)
    }
}
