//! Iterative LQR tracking of a stepwise reference.
//!
//! Each iteration linearizes the unicycle dynamics around the current
//! rollout, solves the time-varying LQR backward pass (with Levenberg-style
//! regularization of the control Hessian), and line-searches the forward
//! rollout with backtracking factor 0.5, accepting only cost decreases.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Matrix2, Matrix2x3, Matrix3, Matrix3x2, Vector2, Vector3};

use super::reference::ReferencePath;
use super::unicycle::{step_unicycle, ControlInput, KinematicLimits, UnicycleState};
use super::TrackError;
use crate::num;

/// Diagonal tracking weights: running state weight `q`, control weight `r`,
/// and the terminal multiplier on `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerWeights {
    pub q: [f64; 3],
    pub r: [f64; 2],
    pub terminal_scale: f64,
}

impl Default for TrackerWeights {
    fn default() -> Self {
        Self {
            q: [1.0, 1.0, 0.1],
            r: [0.05, 0.05],
            terminal_scale: 10.0,
        }
    }
}

/// A dynamically consistent trajectory: `states[k+1]` is exactly one
/// unicycle step from `states[k]` under `controls[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub states: Vec<UnicycleState>,
    pub controls: Vec<ControlInput>,
}

impl Trajectory {
    /// Integrates controls from a start state (clamping applies).
    pub fn rollout(
        start: UnicycleState,
        controls: &[ControlInput],
        dt: f64,
        limits: &KinematicLimits,
    ) -> Self {
        let mut states = Vec::with_capacity(controls.len() + 1);
        states.push(start);
        let mut clamped = Vec::with_capacity(controls.len());
        for u in controls {
            let u = limits.clamp(*u);
            clamped.push(u);
            let next = step_unicycle(*states.last().unwrap(), u, dt, limits);
            states.push(next);
        }
        Self {
            dt,
            states,
            controls: clamped,
        }
    }

    pub fn final_state(&self) -> UnicycleState {
        *self.states.last().unwrap()
    }

    /// Largest per-coordinate deviation when re-integrating the stored
    /// controls; zero for trajectories produced by [`Trajectory::rollout`].
    pub fn resimulation_error(&self, limits: &KinematicLimits) -> f64 {
        let re = Self::rollout(self.states[0], &self.controls, self.dt, limits);
        let mut worst = 0.0f64;
        for (a, b) in self.states.iter().zip(&re.states) {
            worst = worst
                .max(num::abs(a.x - b.x))
                .max(num::abs(a.y - b.y))
                .max(num::abs(a.alpha - b.alpha));
        }
        worst
    }
}

fn pose_error(s: &UnicycleState, r: &UnicycleState) -> Vector3<f64> {
    Vector3::new(s.x - r.x, s.y - r.y, num::wrap_angle(s.alpha - r.alpha))
}

/// Quadratic tracking cost of a trajectory against a reference.
pub fn tracking_cost(traj: &Trajectory, reference: &ReferencePath, w: &TrackerWeights) -> f64 {
    let h = reference.points.len();
    let q = Matrix3::from_diagonal(&Vector3::new(w.q[0], w.q[1], w.q[2]));
    let qf = q * w.terminal_scale;
    let r = Matrix2::from_diagonal(&Vector2::new(w.r[0], w.r[1]));
    let mut cost = 0.0;
    for k in 1..=h {
        let e = pose_error(&traj.states[k], &reference.points[k - 1]);
        let qk = if k == h { &qf } else { &q };
        cost += (qk * e).dot(&e);
        let u = Vector2::new(traj.controls[k - 1].v, traj.controls[k - 1].omega);
        cost += (r * u).dot(&u);
    }
    cost
}

struct Gains {
    feedforward: Vec<Vector2<f64>>,
    feedback: Vec<Matrix2x3<f64>>,
}

fn backward_pass(
    traj: &Trajectory,
    reference: &ReferencePath,
    w: &TrackerWeights,
    mu: f64,
) -> Option<Gains> {
    let h = reference.points.len();
    let dt = traj.dt;
    let q = Matrix3::from_diagonal(&Vector3::new(w.q[0], w.q[1], w.q[2]));
    let qf = q * w.terminal_scale;
    let r = Matrix2::from_diagonal(&Vector2::new(w.r[0], w.r[1]));

    let e_term = pose_error(&traj.states[h], &reference.points[h - 1]);
    let mut v_x: Vector3<f64> = qf * e_term * 2.0;
    let mut v_xx: Matrix3<f64> = qf * 2.0;

    let mut feedforward = vec![Vector2::zeros(); h];
    let mut feedback = vec![Matrix2x3::zeros(); h];

    for k in (0..h).rev() {
        let s = traj.states[k];
        let u = traj.controls[k];
        let (sin_a, cos_a) = (num::sin(s.alpha), num::cos(s.alpha));
        let a = Matrix3::new(
            1.0,
            0.0,
            -u.v * sin_a * dt,
            0.0,
            1.0,
            u.v * cos_a * dt,
            0.0,
            0.0,
            1.0,
        );
        let b = Matrix3x2::new(cos_a * dt, 0.0, sin_a * dt, 0.0, 0.0, dt);

        // running state cost applies to states 1..h-1 (terminal handled above)
        let (l_x, l_xx) = if k >= 1 && k < h {
            let e = pose_error(&s, &reference.points[k - 1]);
            (q * e * 2.0, q * 2.0)
        } else {
            (Vector3::zeros(), Matrix3::zeros())
        };
        let uv = Vector2::new(u.v, u.omega);
        let l_u = r * uv * 2.0;
        let l_uu = r * 2.0;

        let q_x = l_x + a.transpose() * v_x;
        let q_u = l_u + b.transpose() * v_x;
        let q_xx = l_xx + a.transpose() * v_xx * a;
        let q_ux = b.transpose() * v_xx * a;
        let q_uu = l_uu + b.transpose() * v_xx * b + Matrix2::identity() * mu;

        let chol = nalgebra::Cholesky::new(q_uu)?;
        let k_ff = -chol.solve(&q_u);
        let k_fb = -chol.solve(&q_ux);

        v_x = q_x
            + k_fb.transpose() * (q_uu * k_ff)
            + k_fb.transpose() * q_u
            + q_ux.transpose() * k_ff;
        v_xx = q_xx
            + k_fb.transpose() * q_uu * k_fb
            + k_fb.transpose() * q_ux
            + q_ux.transpose() * k_fb;
        v_xx = (v_xx + v_xx.transpose()) * 0.5;

        feedforward[k] = k_ff;
        feedback[k] = k_fb;
    }
    Some(Gains {
        feedforward,
        feedback,
    })
}

fn controlled_rollout(
    base: &Trajectory,
    gains: &Gains,
    step_scale: f64,
    limits: &KinematicLimits,
) -> Trajectory {
    let h = base.controls.len();
    let mut states = Vec::with_capacity(h + 1);
    states.push(base.states[0]);
    let mut controls = Vec::with_capacity(h);
    for k in 0..h {
        let s = *states.last().unwrap();
        let ds = pose_error(&s, &base.states[k]);
        let du = gains.feedforward[k] * step_scale + gains.feedback[k] * ds;
        let u = limits.clamp(ControlInput {
            v: base.controls[k].v + du.x,
            omega: base.controls[k].omega + du.y,
        });
        controls.push(u);
        states.push(step_unicycle(s, u, base.dt, limits));
    }
    Trajectory {
        dt: base.dt,
        states,
        controls,
    }
}

/// Tracks a stepwise reference from `start`, returning a control-limited,
/// re-simulation-consistent trajectory. Cost is non-increasing across
/// accepted iterations; iteration stops after `iters` rounds, on relative
/// improvement below 1e-6, or when no step size improves the cost.
pub fn ilqr_track(
    reference: &ReferencePath,
    start: UnicycleState,
    limits: &KinematicLimits,
    weights: &TrackerWeights,
    iters: usize,
) -> Result<Trajectory, TrackError> {
    if reference.points.is_empty() {
        return Err(TrackError::EmptyReference);
    }
    let h = reference.points.len();
    let zero = vec![ControlInput { v: 0.0, omega: 0.0 }; h];
    let mut traj = Trajectory::rollout(start, &zero, reference.dt, limits);
    let mut cost = tracking_cost(&traj, reference, weights);
    if !cost.is_finite() {
        return Err(TrackError::NonFiniteCost);
    }

    let mut mu = 0.0f64;
    for _ in 0..iters.max(1) {
        let gains = loop {
            match backward_pass(&traj, reference, weights, mu) {
                Some(g) => break g,
                None => {
                    mu = if mu == 0.0 { 1e-6 } else { mu * 10.0 };
                    if mu > 1e10 {
                        return Err(TrackError::NonFiniteCost);
                    }
                }
            }
        };

        let mut accepted = false;
        let mut step = 1.0;
        for _ in 0..12 {
            let candidate = controlled_rollout(&traj, &gains, step, limits);
            let c = tracking_cost(&candidate, reference, weights);
            if !c.is_finite() {
                return Err(TrackError::NonFiniteCost);
            }
            if c < cost {
                let rel = (cost - c) / cost.max(1e-12);
                traj = candidate;
                cost = c;
                accepted = true;
                if rel < 1e-6 {
                    return Ok(traj);
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    fn limits() -> KinematicLimits {
        KinematicLimits::new(1.5, 1.5).unwrap()
    }

    #[test]
    fn fixed_point_on_reference() {
        let reference = ReferencePath {
            dt: 0.2,
            points: vec![UnicycleState::new(1.0, 1.0, 0.5); 10],
        };
        let traj = ilqr_track(
            &reference,
            UnicycleState::new(1.0, 1.0, 0.5),
            &limits(),
            &TrackerWeights::default(),
            30,
        )
        .unwrap();
        let cost = tracking_cost(&traj, &reference, &TrackerWeights::default());
        assert!(cost < 1e-6, "cost {cost}");
        assert!(traj.controls.iter().all(|u| u.v.abs() < 1e-3));
    }

    #[test]
    fn straight_line_tracking() {
        let h = 30;
        let dt = 0.1;
        let points: Vec<UnicycleState> = (0..h)
            .map(|k| UnicycleState::new(((k + 1) as f64) * 0.1, 0.0, 0.0))
            .collect();
        let reference = ReferencePath { dt, points };
        let traj = ilqr_track(
            &reference,
            UnicycleState::new(0.0, 0.0, 0.0),
            &limits(),
            &TrackerWeights::default(),
            50,
        )
        .unwrap();
        for w in traj.states.windows(2) {
            assert!(w[1].x >= w[0].x - 1e-9, "x not monotone");
        }
        assert!(traj.states.iter().all(|s| s.y.abs() < 1e-3));
        let end = traj.final_state();
        assert!((end.x - 3.0).abs() < 0.2, "end {end:?}");
    }

    #[test]
    fn cost_non_increasing_and_consistent() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let mut points = Vec::new();
            let mut target = UnicycleState::new(0.0, 0.0, 0.0);
            for _ in 0..3 {
                let heading = rng.gen_range(-1.0..1.0);
                target = UnicycleState::new(
                    target.x + rng.gen_range(0.3..1.2),
                    target.y + rng.gen_range(-0.8..0.8),
                    heading,
                );
                for _ in 0..10 {
                    points.push(target);
                }
            }
            let reference = ReferencePath { dt: 0.25, points };
            let traj = ilqr_track(
                &reference,
                UnicycleState::new(0.0, 0.0, 0.0),
                &limits(),
                &TrackerWeights::default(),
                40,
            )
            .unwrap();
            assert!(traj.resimulation_error(&limits()) < 1e-9);
            for u in &traj.controls {
                assert!(u.v.abs() <= 1.5 && u.omega.abs() <= 1.5);
            }
        }
    }

    #[test]
    fn waypoint_attainment_on_reachable_references() {
        let limits = limits();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for case in 0..50 {
            let dt = 0.25;
            let mut points = Vec::new();
            let mut waypoints = Vec::new();
            let mut prev = UnicycleState::new(0.0, 0.0, 0.0);
            for _ in 0..rng.gen_range(2..5) {
                let dur = rng.gen_range(8..14);
                // spacing well within v_max * dur * dt and a heading that
                // points along the displacement
                let reach = 0.5 * limits.v_max * dur as f64 * dt;
                let dist = rng.gen_range(0.3..reach.min(2.0));
                let turn = rng.gen_range(-0.9..0.9);
                let heading = num::wrap_angle(prev.alpha + turn);
                let target = UnicycleState::new(
                    prev.x + dist * num::cos(heading),
                    prev.y + dist * num::sin(heading),
                    heading,
                );
                for _ in 0..dur {
                    points.push(target);
                }
                waypoints.push((target, points.len()));
                prev = target;
            }
            let reference = ReferencePath { dt, points };
            let traj = ilqr_track(
                &reference,
                UnicycleState::new(0.0, 0.0, 0.0),
                &limits,
                &TrackerWeights::default(),
                40,
            )
            .unwrap();
            for (target, end) in &waypoints {
                // closest approach during the segment (states are 1-indexed
                // against reference points)
                let start = end - 8;
                let best = (start..=*end)
                    .map(|k| num::hypot(traj.states[k].x - target.x, traj.states[k].y - target.y))
                    .fold(f64::INFINITY, f64::min);
                assert!(
                    best < 0.5,
                    "case {case}: waypoint ({:.2},{:.2}) missed by {best:.3}",
                    target.x,
                    target.y
                );
            }
        }
    }

    #[test]
    fn deterministic() {
        let points: Vec<UnicycleState> = (0..20)
            .map(|k| UnicycleState::new(0.1 * k as f64, 0.05 * k as f64, 0.2))
            .collect();
        let reference = ReferencePath { dt: 0.2, points };
        let a = ilqr_track(
            &reference,
            UnicycleState::new(0.0, 0.0, 0.0),
            &limits(),
            &TrackerWeights::default(),
            25,
        )
        .unwrap();
        let b = ilqr_track(
            &reference,
            UnicycleState::new(0.0, 0.0, 0.0),
            &limits(),
            &TrackerWeights::default(),
            25,
        )
        .unwrap();
        assert_eq!(a, b);
    }
}
