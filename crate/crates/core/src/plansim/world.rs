//! Deterministic 2-D world: obstacle positions are exact functions of the
//! clock (no integration drift) and traffic lights derive their phase from
//! the declared red interval.

use alloc::string::String;
use alloc::vec::Vec;

use crate::constraints::{Rect, Scenario};
use crate::num;

/// The environment at a point in simulated time.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub scenario: Scenario,
    pub clock: f64,
}

impl World {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            clock: 0.0,
        }
    }

    pub fn at_time(&self, clock: f64) -> World {
        World {
            scenario: self.scenario.clone(),
            clock,
        }
    }

    /// True (uninflated) footprint of obstacle `index` at the current clock.
    pub fn obstacle_box(&self, index: usize) -> Rect {
        self.scenario.obstacles[index].box_at(self.clock)
    }

    /// Whether traffic light `index` shows red at the current clock
    /// (half-open interval: the light turns green exactly at `t2`).
    pub fn light_is_red(&self, index: usize) -> bool {
        let (t1, t2) = self.scenario.traffic_lights[index].red_interval;
        self.clock >= t1 && self.clock < t2
    }
}

/// Euclidean distance from a point to the closest point of a rectangle
/// (zero inside).
pub fn distance_to_box(p: (f64, f64), b: &Rect) -> f64 {
    let dx = (b.x_lb - p.0).max(0.0).max(p.0 - b.x_ub);
    let dy = (b.y_lb - p.1).max(0.0).max(p.1 - b.y_ub);
    num::hypot(dx, dy)
}

/// One obstacle as seen in a snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct VisibleObstacle {
    pub id: String,
    /// Uninflated footprint at the snapshot time.
    pub current_box: Rect,
    pub velocity: (f64, f64),
    pub inflation: f64,
}

/// What the ego perceives at a cycle boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct PerceptionSnapshot {
    pub taken_at: f64,
    pub visible_obstacles: Vec<VisibleObstacle>,
    /// Per visible light: `(index, is_red, red_remaining_s)`.
    pub visible_lights: Vec<(usize, bool, f64)>,
}

/// Obstacles and lights within `sensing_range` of the ego (closed
/// comparison, so an obstacle exactly at the boundary is included).
pub fn snapshot_perception(
    world: &World,
    ego: (f64, f64),
    sensing_range: f64,
) -> PerceptionSnapshot {
    let mut visible_obstacles = Vec::new();
    for (i, o) in world.scenario.obstacles.iter().enumerate() {
        let b = world.obstacle_box(i);
        if distance_to_box(ego, &b) <= sensing_range {
            visible_obstacles.push(VisibleObstacle {
                id: o.id.clone(),
                current_box: b,
                velocity: o.velocity,
                inflation: o.inflation,
            });
        }
    }
    let mut visible_lights = Vec::new();
    for (i, tl) in world.scenario.traffic_lights.iter().enumerate() {
        if distance_to_box(ego, &tl.avoid) <= sensing_range {
            let remaining = (tl.red_interval.1 - world.clock).max(0.0);
            visible_lights.push((i, world.light_is_red(i), remaining));
        }
    }
    PerceptionSnapshot {
        taken_at: world.clock,
        visible_obstacles,
        visible_lights,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{Goal, ObstacleSpec, StartPose};
    use alloc::vec;

    fn scenario_with_obstacles() -> Scenario {
        Scenario {
            map_bounds: Rect::new(0.0, 20.0, 0.0, 20.0).unwrap(),
            start: StartPose {
                x: 1.0,
                y: 1.0,
                alpha: 0.0,
            },
            goal: Goal {
                x: 18.0,
                y: 18.0,
                radius: 0.5,
            },
            horizon_t: 10.0,
            dt: 0.5,
            obstacles: vec![
                ObstacleSpec {
                    id: "near".into(),
                    box0: Rect::new(3.0, 4.0, 0.0, 1.0).unwrap(),
                    velocity: (0.0, 0.0),
                    inflation: 0.0,
                },
                ObstacleSpec {
                    id: "far".into(),
                    box0: Rect::new(15.0, 16.0, 15.0, 16.0).unwrap(),
                    velocity: (-1.0, 0.0),
                    inflation: 0.0,
                },
            ],
            road_rule_regions: vec![],
            traffic_lights: vec![],
            safety_distances: vec![],
        }
    }

    #[test]
    fn distance_examples() {
        let b = Rect::new(3.0, 4.0, 0.0, 1.0).unwrap();
        assert_eq!(distance_to_box((0.0, 0.0), &b), 3.0);
        assert_eq!(distance_to_box((3.5, 0.5), &b), 0.0);
        let unit = Rect::new(0.0, 1.0, 0.0, 1.0).unwrap();
        assert!((distance_to_box((5.0, 5.0), &unit) - num::sqrt(32.0)).abs() < 1e-12);
    }

    #[test]
    fn obstacle_position_is_function_of_clock() {
        let w = World::new(scenario_with_obstacles());
        let at2 = w.at_time(2.0);
        assert_eq!(at2.obstacle_box(1).x_lb, 13.0);
        // same query twice: bit-identical
        assert_eq!(at2.obstacle_box(1), at2.obstacle_box(1));
    }

    #[test]
    fn full_range_sees_everything_small_range_nothing() {
        let w = World::new(scenario_with_obstacles());
        let all = snapshot_perception(&w, (1.0, 1.0), 1e6);
        assert_eq!(all.visible_obstacles.len(), 2);
        let none = snapshot_perception(&w, (1.0, 1.0), 1.0);
        assert!(none.visible_obstacles.is_empty());
    }

    #[test]
    fn boundary_is_included() {
        let w = World::new(scenario_with_obstacles());
        // obstacle `near` is exactly 2.0 away from (1.0, 0.5)
        let snap = snapshot_perception(&w, (1.0, 0.5), 2.0);
        assert_eq!(snap.visible_obstacles.len(), 1);
        assert_eq!(snap.visible_obstacles[0].id, "near");
    }
}
