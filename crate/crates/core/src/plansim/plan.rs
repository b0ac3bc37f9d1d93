//! Single-shot and continuous multi-cycle planning.
//!
//! Both planners share the same objective chain per candidate parameter
//! vector: write the parameters onto the model, expand the component
//! schedule into a stepwise reference, track it with the iterative LQR,
//! assemble the evaluation trace over extrapolated obstacle channels, and
//! score the smooth robustness of the composed formula at t = 0.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::execute::{simulate_execution, simulate_execution_with_spec, ExecutedTrace};
use super::world::{distance_to_box, snapshot_perception, World};
use super::PlanError;
use crate::constraints::{
    build_obstacle_formula, build_road_rule_formula, build_safety_distance_formula,
    build_traffic_light_formula, check_channels, compose_scenario_spec, obstacle_channels,
    obstacle_channels_from, trivially_true, ObstacleSpec, SafetyDistance, Scenario,
    TrafficLightSpec,
};
use crate::lfd::{
    apply_theta, decode_states, extract_theta, Demonstration, HsmmModel, ParamVector, ThetaBounds,
};
use crate::num;
use crate::optimize::{optimize, Objective, OptResult, OptSettings};
use crate::reproduce::{
    build_reference, ilqr_track, trajectory_to_trace, KinematicLimits, TrackerWeights, Trajectory,
    UnicycleState,
};
use crate::stl::{smooth_robustness, Formula, Interval};
use crate::time::Clock;

/// Tracker, smoothing, and perception knobs shared by both planners.
#[derive(Debug, Clone)]
pub struct PlannerConfig {
    pub limits: KinematicLimits,
    pub weights: TrackerWeights,
    pub tracker_iters: usize,
    /// Smoothing sharpness for the optimization objective.
    pub nu: f64,
    /// Margin added around the map bounds for the mean search box.
    pub mean_margin: f64,
    /// Perception radius; `None` derives it from the next cycle's reference.
    pub sensing_range: Option<f64>,
    /// Distance at which close-approach obligations enter a cycle's formula.
    pub trigger_radius: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            limits: KinematicLimits {
                v_max: 1.5,
                omega_max: 1.5,
            },
            weights: TrackerWeights::default(),
            tracker_iters: 30,
            nu: 5.0,
            mean_margin: 2.0,
            sensing_range: None,
            trigger_radius: 5.0,
        }
    }
}

/// Everything a single-shot run produces.
#[derive(Debug, Clone)]
pub struct PlanOutcome {
    pub opt: OptResult,
    pub spec: Formula,
    pub initial_trajectory: Trajectory,
    pub initial_executed: ExecutedTrace,
    pub best_trajectory: Trajectory,
    pub best_executed: ExecutedTrace,
}

fn theta_bounds(scenario: &Scenario, config: &PlannerConfig, horizon_steps: usize) -> ThetaBounds {
    ThetaBounds::new(
        (
            scenario.map_bounds.x_lb - config.mean_margin,
            scenario.map_bounds.y_lb - config.mean_margin,
        ),
        (
            scenario.map_bounds.x_ub + config.mean_margin,
            scenario.map_bounds.y_ub + config.mean_margin,
        ),
        horizon_steps as f64,
    )
}

/// Reproduces the trajectory a parameter vector encodes.
fn reproduce(
    base: &HsmmModel,
    theta: &ParamVector,
    start: UnicycleState,
    horizon_steps: usize,
    config: &PlannerConfig,
) -> Result<Trajectory, PlanError> {
    let model = apply_theta(base, theta)?;
    let reference = build_reference(&model, start, horizon_steps)?;
    Ok(ilqr_track(
        &reference,
        start,
        &config.limits,
        &config.weights,
        config.tracker_iters,
    )?)
}

/// The smooth-robustness objective over a fixed spec and world channels.
/// Evaluation failures surface as NaN, which the optimizer discards.
fn robustness_objective<'a>(
    base: &'a HsmmModel,
    template: &'a ParamVector,
    start: UnicycleState,
    horizon_steps: usize,
    config: &'a PlannerConfig,
    spec: &'a Formula,
    channels: &'a BTreeMap<String, Vec<f64>>,
) -> impl Fn(&[f64]) -> f64 + 'a {
    move |values: &[f64]| {
        let theta = ParamVector {
            values: values.to_vec(),
            layout: template.layout,
            bounds: template.bounds.clone(),
        };
        let result = reproduce(base, &theta, start, horizon_steps, config)
            .and_then(|traj| Ok(trajectory_to_trace(&traj, channels)?))
            .and_then(|trace| Ok(smooth_robustness(spec, &trace, 0, config.nu)?));
        result.unwrap_or(f64::NAN)
    }
}

/// Optimizes the model against the full-horizon scenario formula, reproduces
/// the best trajectory, and executes both it and the unoptimized baseline in
/// the true world.
pub fn plan_single(
    model: &HsmmModel,
    scenario: &Scenario,
    config: &PlannerConfig,
    settings: &OptSettings,
    clock: &dyn Clock,
) -> Result<PlanOutcome, PlanError> {
    let spec = compose_scenario_spec(scenario)?;
    plan_single_spec(model, scenario, &spec, config, settings, clock)
}

/// As [`plan_single`], optimizing and scoring an explicit formula instead of
/// the scenario's composed one.
pub fn plan_single_spec(
    model: &HsmmModel,
    scenario: &Scenario,
    spec: &Formula,
    config: &PlannerConfig,
    settings: &OptSettings,
    clock: &dyn Clock,
) -> Result<PlanOutcome, PlanError> {
    if num::abs(model.dt - scenario.dt) > 1e-12 {
        return Err(PlanError::Invalid("model dt must match scenario dt"));
    }
    let spec = spec.clone();
    check_channels(&spec, &scenario.obstacles)?;
    let horizon_steps = scenario.horizon_steps();
    let samples = horizon_steps + 1;

    let mut channels: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for o in &scenario.obstacles {
        channels.append(&mut obstacle_channels(o, samples, scenario.dt));
    }

    let start = UnicycleState::new(scenario.start.x, scenario.start.y, scenario.start.alpha);
    let bounds = theta_bounds(scenario, config, horizon_steps);
    let theta0 = extract_theta(model, &bounds);

    let opt = {
        let objective = Objective {
            evaluate: robustness_objective(
                model,
                &theta0,
                start,
                horizon_steps,
                config,
                &spec,
                &channels,
            ),
            bounds: theta0.bounds.clone(),
            initial: theta0.values.clone(),
        };
        optimize(&objective, settings, clock)?
    };

    let best_theta = ParamVector {
        values: opt.best_point.clone(),
        layout: theta0.layout,
        bounds: theta0.bounds.clone(),
    };
    let initial_trajectory = reproduce(model, &theta0, start, horizon_steps, config)?;
    let best_trajectory = reproduce(model, &best_theta, start, horizon_steps, config)?;

    let world = World::new(scenario.clone());
    let initial_executed = simulate_execution_with_spec(&world, &initial_trajectory, &spec)?;
    let best_executed = simulate_execution_with_spec(&world, &best_trajectory, &spec)?;

    Ok(PlanOutcome {
        opt,
        spec,
        initial_trajectory,
        initial_executed,
        best_trajectory,
        best_executed,
    })
}

/// One row of the continuous planner's timing report. A row describes one
/// wall period: the optimization launched in it and the cycle executed
/// during it (the pre-motion period has no execution, the final period no
/// optimization).
#[derive(Debug, Clone, PartialEq)]
pub struct CycleReport {
    pub cycle_index: usize,
    pub initial_robustness: Option<f64>,
    pub optimized_robustness: Option<f64>,
    pub optimization_time_s: Option<f64>,
    pub simulation_time_s: Option<f64>,
    pub deadline_met: bool,
}

/// Continuous run artifacts.
#[derive(Debug, Clone)]
pub struct ContinuousOutcome {
    pub reports: Vec<CycleReport>,
    pub executed: ExecutedTrace,
    pub trajectory: Trajectory,
}

/// Restriction of a model to a component subset, with transition rows
/// renormalized over the subset.
fn restrict_model(model: &HsmmModel, subset: &[usize]) -> HsmmModel {
    let k = subset.len();
    let mut trans = Vec::with_capacity(k);
    for &i in subset {
        let mut row: Vec<f64> = subset.iter().map(|&j| model.trans[i][j]).collect();
        let sum: f64 = row.iter().sum();
        if sum > 1e-12 {
            for p in &mut row {
                *p /= sum;
            }
        } else {
            // no internal mass: make the state absorbing within the cycle
            for (idx, p) in row.iter_mut().enumerate() {
                *p = if subset[idx] == i { 1.0 } else { 0.0 };
            }
        }
        trans.push(row);
    }
    HsmmModel {
        trans,
        means: subset.iter().map(|&i| model.means[i]).collect(),
        covs: subset.iter().map(|&i| model.covs[i]).collect(),
        dur_mean: subset.iter().map(|&i| model.dur_mean[i]).collect(),
        dur_var: subset.iter().map(|&i| model.dur_var[i]).collect(),
        dt: model.dt,
    }
}

/// Components per cycle by the median decoded timestep of their training
/// samples; empty cycles inherit the nearest earlier component (or the
/// earliest overall at the front).
fn assign_components_to_cycles(
    model: &HsmmModel,
    demos: &[Demonstration],
    cycles: usize,
    cycle_seconds: f64,
) -> Result<Vec<Vec<usize>>, PlanError> {
    let k = model.k();
    let mut times: Vec<Vec<f64>> = alloc::vec![Vec::new(); k];
    for demo in demos {
        let seq = decode_states(model, demo)?;
        for (t, &label) in seq.labels.iter().enumerate() {
            times[label].push(t as f64 * demo.dt);
        }
    }
    let mut assignment: Vec<Vec<usize>> = alloc::vec![Vec::new(); cycles];
    for j in 0..k {
        if times[j].is_empty() {
            continue; // component never used by the data; leave it out
        }
        times[j].sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = times[j][times[j].len() / 2];
        let cycle = ((median / cycle_seconds) as usize).min(cycles - 1);
        assignment[cycle].push(j);
    }
    // components stay in index order within a cycle (fit order is temporal)
    for cycle in &mut assignment {
        cycle.sort_unstable();
    }
    // fill empty cycles from the nearest earlier one
    let mut last_nonempty: Option<usize> = None;
    for m in 0..cycles {
        if assignment[m].is_empty() {
            if let Some(prev) = last_nonempty {
                let borrow = *assignment[prev].last().unwrap();
                assignment[m].push(borrow);
            }
        } else {
            last_nonempty = Some(m);
        }
    }
    // a leading run of empties borrows from the first nonempty cycle
    if let Some(first_nonempty) = assignment.iter().position(|c| !c.is_empty()) {
        let borrow = assignment[first_nonempty][0];
        for cycle in assignment.iter_mut().take(first_nonempty) {
            cycle.push(borrow);
        }
    } else {
        return Err(PlanError::Invalid(
            "decoding assigned no samples to any component",
        ));
    }
    Ok(assignment)
}

/// Per-cycle formula over the snapshot: visible obstacles, road rules,
/// triggered close-approach terms, and lights whose red interval overlaps
/// the cycle (shifted to cycle-local time).
fn cycle_spec(
    scenario: &Scenario,
    visible: &[ObstacleSpec],
    cycle_start_s: f64,
    cycle_seconds: f64,
    cycle_start_state: &UnicycleState,
    trigger_radius: f64,
) -> Result<Formula, PlanError> {
    let window = Interval::new(0.0, cycle_seconds).map_err(PlanError::Stl)?;
    let mut parts: Vec<Formula> = Vec::new();
    if !visible.is_empty() {
        parts.push(build_obstacle_formula(visible, window)?);
    }
    if !scenario.road_rule_regions.is_empty() {
        parts.push(build_road_rule_formula(&scenario.road_rule_regions, window));
    }
    for sd in &scenario.safety_distances {
        let Some(o) = visible.iter().find(|o| o.id == sd.obstacle) else {
            continue;
        };
        let d = distance_to_box((cycle_start_state.x, cycle_start_state.y), &o.box0);
        if d <= trigger_radius {
            let local = SafetyDistance {
                window: (0.0, cycle_seconds),
                ..sd.clone()
            };
            parts.push(build_safety_distance_formula(&local, visible)?);
        }
    }
    for tl in &scenario.traffic_lights {
        let (t1, t2) = tl.red_interval;
        let lo = (t1 - cycle_start_s).max(0.0);
        let hi = (t2 - cycle_start_s).min(cycle_seconds);
        if lo < hi {
            let local = TrafficLightSpec {
                red_interval: (lo, hi),
                ..tl.clone()
            };
            parts.push(build_traffic_light_formula(&local)?);
        }
    }
    Ok(Formula::conjunction(parts).unwrap_or_else(trivially_true))
}

/// Runs the continuous multi-cycle planner.
///
/// The horizon splits into `cycles` equal segments. Cycle 1 is optimized
/// before motion begins; while cycle `m` executes (simulated budget `T_m`),
/// cycle `m+1` is optimized against a perception snapshot taken at cycle
/// `m`'s start, with the optimizer deadline set to `T_m`. Each cycle's
/// trajectory starts from the previous cycle's end state, and the
/// concatenated trajectory is executed against the true world.
pub fn plan_continuous(
    model: &HsmmModel,
    scenario: &Scenario,
    demos: &[Demonstration],
    cycles: usize,
    config: &PlannerConfig,
    settings: &OptSettings,
    clock: &dyn Clock,
) -> Result<ContinuousOutcome, PlanError> {
    if cycles == 0 {
        return Err(PlanError::Invalid("cycle count must be at least 1"));
    }
    let horizon_steps = scenario.horizon_steps();
    if !horizon_steps.is_multiple_of(cycles) {
        return Err(PlanError::Invalid("horizon must divide evenly into cycles"));
    }
    let steps_per_cycle = horizon_steps / cycles;
    let cycle_seconds = scenario.horizon_t / cycles as f64;
    let world = World::new(scenario.clone());
    let assignment = assign_components_to_cycles(model, demos, cycles, cycle_seconds)?;

    let mut cycle_stats: Vec<(f64, f64, f64)> = Vec::with_capacity(cycles); // (initial, best, opt_time)
    let mut segments: Vec<Trajectory> = Vec::with_capacity(cycles);
    let mut cycle_start_state =
        UnicycleState::new(scenario.start.x, scenario.start.y, scenario.start.alpha);

    for m in 0..cycles {
        let sub = restrict_model(model, &assignment[m]);
        let cycle_start_s = m as f64 * cycle_seconds;
        // cycle 1 is optimized before motion; later cycles while the
        // previous one executes, from a snapshot at that cycle's start
        let (snapshot_s, lead_s) = if m == 0 {
            (0.0, 0.0)
        } else {
            ((m - 1) as f64 * cycle_seconds, cycle_seconds)
        };

        let bounds = theta_bounds(scenario, config, steps_per_cycle);
        let theta0 = extract_theta(&sub, &bounds);

        // perception: default range covers the cycle's own reference area
        let sensing_range = match config.sensing_range {
            Some(r) => r,
            None => {
                let reference = build_reference(&sub, cycle_start_state, steps_per_cycle)?;
                let extent = reference
                    .points
                    .iter()
                    .map(|p| num::hypot(p.x - cycle_start_state.x, p.y - cycle_start_state.y))
                    .fold(0.0, f64::max);
                1.5 * extent.max(1.0)
            }
        };
        let snapshot = snapshot_perception(
            &world.at_time(snapshot_s),
            (cycle_start_state.x, cycle_start_state.y),
            sensing_range,
        );

        // extrapolated channels and spec over the visible subset
        let samples = steps_per_cycle + 1;
        let mut channels: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        let mut visible: Vec<ObstacleSpec> = Vec::new();
        for v in &snapshot.visible_obstacles {
            channels.append(&mut obstacle_channels_from(
                &v.id,
                &v.current_box,
                v.velocity,
                v.inflation,
                samples,
                scenario.dt,
                lead_s,
            ));
            visible.push(ObstacleSpec {
                id: v.id.clone(),
                // spec construction only needs the id and trigger geometry
                box0: v
                    .current_box
                    .translated(v.velocity.0 * lead_s, v.velocity.1 * lead_s),
                velocity: v.velocity,
                inflation: v.inflation,
            });
        }
        let spec = cycle_spec(
            scenario,
            &visible,
            cycle_start_s,
            cycle_seconds,
            &cycle_start_state,
            config.trigger_radius,
        )?;
        check_channels(&spec, &visible)?;

        let mut cycle_settings = settings.clone();
        cycle_settings.deadline_s = Some(
            settings
                .deadline_s
                .map_or(cycle_seconds, |d| d.min(cycle_seconds)),
        );
        cycle_settings.seed = settings.seed.wrapping_add(m as u64);
        let opt = {
            let objective = Objective {
                evaluate: robustness_objective(
                    &sub,
                    &theta0,
                    cycle_start_state,
                    steps_per_cycle,
                    config,
                    &spec,
                    &channels,
                ),
                bounds: theta0.bounds.clone(),
                initial: theta0.values.clone(),
            };
            optimize(&objective, &cycle_settings, clock)?
        };

        let best_theta = ParamVector {
            values: opt.best_point.clone(),
            layout: theta0.layout,
            bounds: theta0.bounds.clone(),
        };
        let traj = reproduce(
            &sub,
            &best_theta,
            cycle_start_state,
            steps_per_cycle,
            config,
        )?;
        cycle_start_state = traj.final_state();
        segments.push(traj);
        cycle_stats.push((opt.initial_value, opt.best_value, opt.wall_time_total));
    }

    // hand the segments off into one executed run
    let mut states = Vec::with_capacity(horizon_steps + 1);
    let mut controls = Vec::with_capacity(horizon_steps);
    states.push(segments[0].states[0]);
    for seg in &segments {
        debug_assert_eq!(seg.states[0], *states.last().unwrap());
        states.extend_from_slice(&seg.states[1..]);
        controls.extend_from_slice(&seg.controls);
    }
    let trajectory = Trajectory {
        dt: scenario.dt,
        states,
        controls,
    };
    let executed = simulate_execution(&world, &trajectory)?;

    // table rows: period k optimizes cycle k while cycle k-1 executes
    let mut reports = Vec::with_capacity(cycles + 1);
    for period in 0..=cycles {
        let opt_stats = if period < cycles {
            Some(cycle_stats[period])
        } else {
            None
        };
        let executed_stats = if period > 0 {
            Some(cycle_stats[period - 1])
        } else {
            None
        };
        reports.push(CycleReport {
            cycle_index: period + 1,
            initial_robustness: executed_stats.map(|(i, _, _)| i),
            optimized_robustness: executed_stats.map(|(_, b, _)| b),
            optimization_time_s: opt_stats.map(|(_, _, t)| t),
            simulation_time_s: executed_stats.map(|_| cycle_seconds),
            deadline_met: opt_stats.is_none_or(|(_, _, t)| t < cycle_seconds),
        });
    }

    Ok(ContinuousOutcome {
        reports,
        executed,
        trajectory,
    })
}
