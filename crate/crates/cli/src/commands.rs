//! Command implementations. Each command prints exactly one JSON report to
//! stdout; progress and warnings go to stderr.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use tlplan_core::lfd::{decode_states, fit_hsmm_with_report};
use tlplan_core::plansim::{plan_continuous, plan_single, ContinuousOutcome, PlanOutcome};
use tlplan_core::stl::{eval_bool, parse_formula, robustness, smooth_robustness, Semantics};
use tlplan_core::time::WallClock;

use crate::config::RunConfig;
use crate::{io, plot};

fn ensure_output_dir(config: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&config.paths.output_dir).with_context(|| {
        format!(
            "creating output directory {}",
            config.paths.output_dir.display()
        )
    })
}

fn print_report<T: Serialize>(report: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(report)?);
    Ok(())
}

#[derive(Serialize)]
struct FitReportOut {
    model_path: String,
    components: usize,
    demos: usize,
    iterations: usize,
    final_log_likelihood: f64,
}

/// Fits the motion model from the demo directory and writes `model.json`
/// plus a fit report (log-likelihood curve and decoded segments).
pub fn cmd_fit(config: &RunConfig) -> Result<()> {
    ensure_output_dir(config)?;
    let demos = io::read_demos_dir(&config.paths.demos_dir)?;
    eprintln!("fit: {} demonstrations loaded", demos.len());
    let (model, report) = fit_hsmm_with_report(
        &demos,
        config.lfd.components,
        config.lfd.seed,
        config.lfd.max_iters,
        config.lfd.tol,
    )
    .map_err(|e| anyhow::anyhow!("{e}"))?;

    if let Some(parent) = config.paths.model.parent() {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating model directory {}", parent.display()))?;
    }
    io::write_model_json(&config.paths.model, &model)?;

    // decoded segment table alongside the likelihood curve
    #[derive(Serialize)]
    struct FitDiagnostics {
        log_likelihood: Vec<f64>,
        segments: Vec<Vec<(usize, usize, usize)>>,
        decoded: Vec<Vec<usize>>,
    }
    let decoded: Vec<Vec<usize>> = demos
        .iter()
        .map(|d| decode_states(&model, d).map(|s| s.labels))
        .collect::<Result<_, _>>()
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let diagnostics = FitDiagnostics {
        log_likelihood: report.log_likelihood.clone(),
        segments: report.segments.clone(),
        decoded,
    };
    let fit_path = config.paths.output_dir.join("fit_report.json");
    std::fs::write(&fit_path, serde_json::to_string_pretty(&diagnostics)?)?;

    print_report(&FitReportOut {
        model_path: config.paths.model.display().to_string(),
        components: model.k(),
        demos: demos.len(),
        iterations: report.log_likelihood.len(),
        final_log_likelihood: *report.log_likelihood.last().unwrap(),
    })
}

#[derive(Serialize)]
struct PlanReportOut {
    satisfied: bool,
    marginal: bool,
    final_robustness: f64,
    initial_executed_robustness: f64,
    initial_smooth: f64,
    optimized_smooth: f64,
    evaluations: usize,
    wall_time_s: f64,
    collisions: Vec<(String, usize)>,
    output_dir: String,
}

fn load_planning_inputs(
    config: &RunConfig,
) -> Result<(
    tlplan_core::lfd::HsmmModel,
    tlplan_core::constraints::Scenario,
)> {
    let model = io::read_model_json(&config.paths.model)?;
    let (scenario, warnings) = io::read_scenario_json(&config.paths.scenario)?;
    for w in warnings {
        eprintln!("scenario warning: {w}");
    }
    Ok((model, scenario))
}

fn write_plan_outputs(
    config: &RunConfig,
    scenario: &tlplan_core::constraints::Scenario,
    demos: &[tlplan_core::lfd::Demonstration],
    outcome: &PlanOutcome,
) -> Result<()> {
    let out = &config.paths.output_dir;
    io::write_trajectory_csv(&out.join("trajectory.csv"), &outcome.best_trajectory)?;
    io::write_trace_csv(&out.join("trace.csv"), &outcome.best_executed.trace)?;
    io::write_trace_csv(
        &out.join("initial_trace.csv"),
        &outcome.initial_executed.trace,
    )?;
    io::write_history_csv(&out.join("opt_history.csv"), &outcome.opt.history)?;
    io::write_distances_csv(&out.join("distances.csv"), &outcome.best_executed)?;
    plot::write_trajectory_svg(
        &out.join("trajectory.svg"),
        scenario,
        demos,
        &outcome.initial_trajectory,
        &outcome.best_trajectory,
    )?;
    plot::write_distances_svg(
        &out.join("distances.svg"),
        scenario,
        &outcome.initial_executed,
        &outcome.best_executed,
    )?;
    plot::write_history_svg(&out.join("robustness.svg"), &outcome.opt.history)?;
    Ok(())
}

/// Single-shot planning: optimize over the full horizon, execute, report.
pub fn cmd_plan(config: &RunConfig) -> Result<()> {
    ensure_output_dir(config)?;
    let (model, scenario) = load_planning_inputs(config)?;
    let demos = io::read_demos_dir(&config.paths.demos_dir).unwrap_or_default();

    let planner = config.planner_config()?;
    let settings = config.opt_settings();
    let clock = WallClock::new();

    let outcome = if let Some(spec_path) = &config.paths.spec_override {
        let text = std::fs::read_to_string(spec_path)
            .with_context(|| format!("reading spec override {}", spec_path.display()))?;
        let formula = parse_formula(&text).map_err(|e| anyhow::anyhow!("{e}"))?;
        tlplan_core::plansim::plan_single_spec(
            &model, &scenario, &formula, &planner, &settings, &clock,
        )
        .map_err(|e| anyhow::anyhow!("{e}"))?
    } else {
        plan_single(&model, &scenario, &planner, &settings, &clock)
            .map_err(|e| anyhow::anyhow!("{e}"))?
    };

    write_plan_outputs(config, &scenario, &demos, &outcome)?;

    let final_robustness = outcome.best_executed.final_robustness;
    let report = PlanReportOut {
        satisfied: final_robustness > 0.0,
        marginal: final_robustness == 0.0,
        final_robustness,
        initial_executed_robustness: outcome.initial_executed.final_robustness,
        initial_smooth: outcome.opt.initial_value,
        optimized_smooth: outcome.opt.best_value,
        evaluations: outcome.opt.history.len(),
        wall_time_s: outcome.opt.wall_time_total,
        collisions: outcome.best_executed.collisions.clone(),
        output_dir: config.paths.output_dir.display().to_string(),
    };
    std::fs::write(
        config.paths.output_dir.join("result.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    print_report(&report)
}

#[derive(Serialize)]
struct RunReportOut {
    satisfied: bool,
    final_robustness: f64,
    cycles: usize,
    all_cycles_positive: bool,
    all_deadlines_met: bool,
    collisions: Vec<(String, usize)>,
    output_dir: String,
}

/// Continuous multi-cycle planning with the cycle report table.
pub fn cmd_run(config: &RunConfig) -> Result<()> {
    ensure_output_dir(config)?;
    let (model, scenario) = load_planning_inputs(config)?;
    let demos = io::read_demos_dir(&config.paths.demos_dir)?;
    let planner = config.planner_config()?;
    let settings = config.opt_settings();
    let clock = WallClock::new();

    let outcome: ContinuousOutcome = plan_continuous(
        &model,
        &scenario,
        &demos,
        config.planner.cycles,
        &planner,
        &settings,
        &clock,
    )
    .map_err(|e| anyhow::anyhow!("{e}"))?;

    let out = &config.paths.output_dir;
    io::write_cycles_csv(&out.join("cycles.csv"), &outcome.reports)?;
    io::write_trace_csv(&out.join("trace.csv"), &outcome.executed.trace)?;
    io::write_trajectory_csv(&out.join("trajectory.csv"), &outcome.trajectory)?;
    io::write_distances_csv(&out.join("distances.csv"), &outcome.executed)?;
    plot::write_trajectory_svg(
        &out.join("trajectory.svg"),
        &scenario,
        &demos,
        &outcome.trajectory,
        &outcome.trajectory,
    )?;

    let all_cycles_positive = outcome
        .reports
        .iter()
        .filter_map(|r| r.optimized_robustness)
        .all(|v| v > 0.0);
    let all_deadlines_met = outcome.reports.iter().all(|r| r.deadline_met);
    let report = RunReportOut {
        satisfied: outcome.executed.final_robustness > 0.0,
        final_robustness: outcome.executed.final_robustness,
        cycles: config.planner.cycles,
        all_cycles_positive,
        all_deadlines_met,
        collisions: outcome.executed.collisions.clone(),
        output_dir: out.display().to_string(),
    };
    std::fs::write(
        out.join("result.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    print_report(&report)
}

#[derive(Serialize)]
pub struct MonitorReport {
    pub satisfied: bool,
    pub marginal: bool,
    pub verdict: bool,
    pub classical_robustness: f64,
    pub smooth_robustness: f64,
}

/// Evaluates a formula against a recorded trace. Returns the report; the
/// caller maps it onto the exit code.
pub fn cmd_monitor(
    trace_path: &Path,
    spec_path: &Path,
    nu: f64,
    semantics: Semantics,
) -> Result<MonitorReport> {
    let trace = io::read_trace_csv(trace_path)?;
    let text = std::fs::read_to_string(spec_path)
        .with_context(|| format!("reading spec {}", spec_path.display()))?;
    let formula = parse_formula(&text).map_err(|e| anyhow::anyhow!("{e}"))?;
    let classical = robustness(&formula, &trace, 0).map_err(|e| anyhow::anyhow!("{e}"))?;
    let smooth = smooth_robustness(&formula, &trace, 0, nu).map_err(|e| anyhow::anyhow!("{e}"))?;
    let verdict = eval_bool(&formula, &trace, 0).map_err(|e| anyhow::anyhow!("{e}"))?;
    let decisive = match semantics {
        Semantics::Classical => classical,
        Semantics::Smooth => smooth,
    };
    let report = MonitorReport {
        satisfied: decisive > 0.0,
        marginal: decisive == 0.0,
        verdict,
        classical_robustness: classical,
        smooth_robustness: smooth,
    };
    print_report(&report)?;
    Ok(report)
}
