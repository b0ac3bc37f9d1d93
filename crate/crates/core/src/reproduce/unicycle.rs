//! Discrete unicycle kinematics.

use serde::{Deserialize, Serialize};

use super::TrackError;
use crate::num;

/// Planar pose with heading wrapped to `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnicycleState {
    pub x: f64,
    pub y: f64,
    pub alpha: f64,
}

impl UnicycleState {
    pub fn new(x: f64, y: f64, alpha: f64) -> Self {
        Self {
            x,
            y,
            alpha: num::wrap_angle(alpha),
        }
    }
}

/// Forward speed and turn rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlInput {
    pub v: f64,
    pub omega: f64,
}

/// Symmetric actuation limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicLimits {
    pub v_max: f64,
    pub omega_max: f64,
}

impl KinematicLimits {
    pub fn new(v_max: f64, omega_max: f64) -> Result<Self, TrackError> {
        if !(v_max > 0.0) || !(omega_max > 0.0) {
            return Err(TrackError::BadConfig("limits must be positive"));
        }
        Ok(Self { v_max, omega_max })
    }

    pub fn clamp(&self, u: ControlInput) -> ControlInput {
        ControlInput {
            v: u.v.clamp(-self.v_max, self.v_max),
            omega: u.omega.clamp(-self.omega_max, self.omega_max),
        }
    }
}

/// One Euler step of the unicycle; controls are clamped before integration.
pub fn step_unicycle(
    s: UnicycleState,
    u: ControlInput,
    dt: f64,
    limits: &KinematicLimits,
) -> UnicycleState {
    let u = limits.clamp(u);
    UnicycleState {
        x: s.x + u.v * num::cos(s.alpha) * dt,
        y: s.y + u.v * num::sin(s.alpha) * dt,
        alpha: num::wrap_angle(s.alpha + u.omega * dt),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn limits() -> KinematicLimits {
        KinematicLimits::new(2.0, 4.0).unwrap()
    }

    #[test]
    fn drives_along_heading() {
        let s = step_unicycle(
            UnicycleState::new(0.0, 0.0, 0.0),
            ControlInput { v: 1.0, omega: 0.0 },
            0.1,
            &limits(),
        );
        assert!((s.x - 0.1).abs() < 1e-15 && s.y.abs() < 1e-15 && s.alpha.abs() < 1e-15);

        let s = step_unicycle(
            UnicycleState::new(0.0, 0.0, PI / 2.0),
            ControlInput { v: 1.0, omega: 0.0 },
            0.1,
            &limits(),
        );
        assert!(s.x.abs() < 1e-15 && (s.y - 0.1).abs() < 1e-12);
    }

    #[test]
    fn heading_wraps() {
        let s = step_unicycle(
            UnicycleState::new(0.0, 0.0, PI / 2.0),
            ControlInput { v: 0.0, omega: PI },
            1.0,
            &limits(),
        );
        assert!(s.alpha > -PI && s.alpha <= PI);
        assert!((s.alpha - (-PI / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn controls_clamped() {
        let s = step_unicycle(
            UnicycleState::new(0.0, 0.0, 0.0),
            ControlInput {
                v: 100.0,
                omega: 0.0,
            },
            1.0,
            &limits(),
        );
        assert!((s.x - 2.0).abs() < 1e-15);
    }
}
