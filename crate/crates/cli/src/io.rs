//! File formats: demonstration CSV, model JSON, scenario JSON, executed
//! trace CSV, and the report CSVs. Floats are written with Rust's shortest
//! round-trip formatting, so identical data produces identical bytes.

use std::path::Path;

use anyhow::{bail, Context, Result};
use tlplan_core::constraints::Scenario;
use tlplan_core::lfd::{Demonstration, HsmmModel};
use tlplan_core::plansim::{CycleReport, ExecutedTrace};
use tlplan_core::reproduce::Trajectory;
use tlplan_core::trace::Trace;

/// Reads one demonstration from a `t,x,y,alpha` CSV with uniform spacing.
pub fn read_demo_csv(path: &Path) -> Result<Demonstration> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading demo {}", path.display()))?;
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| anyhow::anyhow!("{}: empty file", path.display()))?
        .1
        .trim();
    if header != "t,x,y,alpha" {
        bail!(
            "{}:1: expected header `t,x,y,alpha`, got `{header}`",
            path.display()
        );
    }
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            bail!(
                "{}:{}: expected 4 fields, got {}",
                path.display(),
                i + 1,
                fields.len()
            );
        }
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("{}:{}: bad {what} `{s}`", path.display(), i + 1))
        };
        times.push(parse(fields[0], "time")?);
        states.push([
            parse(fields[1], "x")?,
            parse(fields[2], "y")?,
            parse(fields[3], "alpha")?,
        ]);
    }
    if states.len() < 2 {
        bail!("{}: need at least two samples", path.display());
    }
    let dt = times[1] - times[0];
    for (i, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 {
            bail!(
                "{}:{}: non-uniform time spacing ({} vs {dt})",
                path.display(),
                i + 3,
                w[1] - w[0]
            );
        }
    }
    Demonstration::new(dt, states).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

/// Reads every `*.csv` in a directory (sorted by name) as demonstrations.
pub fn read_demos_dir(dir: &Path) -> Result<Vec<Demonstration>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .with_context(|| format!("listing demos in {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|e| e == "csv").unwrap_or(false))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no demo CSV files in {}", dir.display());
    }
    paths.iter().map(|p| read_demo_csv(p)).collect()
}

pub fn write_demo_csv(path: &Path, demo: &Demonstration) -> Result<()> {
    let mut out = String::from("t,x,y,alpha\n");
    for (k, s) in demo.states.iter().enumerate() {
        let t = k as f64 * demo.dt;
        out.push_str(&format!("{t},{},{},{}\n", s[0], s[1], s[2]));
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub fn read_model_json(path: &Path) -> Result<HsmmModel> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading model {}", path.display()))?;
    let model: HsmmModel =
        serde_json::from_str(&text).with_context(|| format!("parsing model {}", path.display()))?;
    model
        .validated()
        .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

pub fn write_model_json(path: &Path, model: &HsmmModel) -> Result<()> {
    let text = serde_json::to_string_pretty(model)?;
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_scenario_json(path: &Path) -> Result<(Scenario, Vec<String>)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading scenario {}", path.display()))?;
    let scenario: Scenario = serde_json::from_str(&text)
        .with_context(|| format!("parsing scenario {}", path.display()))?;
    let warnings = scenario
        .validate()
        .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
    Ok((scenario, warnings))
}

/// Executed trace as CSV: `t` column plus every channel in name order.
pub fn write_trace_csv(path: &Path, trace: &Trace) -> Result<()> {
    let names: Vec<&str> = trace.channel_names().collect();
    let mut out = String::from("t");
    for n in &names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for k in 0..trace.len() {
        out.push_str(&format!("{}", k as f64 * trace.dt()));
        for n in &names {
            out.push_str(&format!(",{}", trace.channel(n).unwrap()[k]));
        }
        out.push('\n');
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// Reads a trace CSV written by [`write_trace_csv`] (or hand-made in the
/// same shape).
pub fn read_trace_csv(path: &Path) -> Result<Trace> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading trace {}", path.display()))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| anyhow::anyhow!("{}: empty file", path.display()))?;
    let names: Vec<&str> = header.trim().split(',').collect();
    if names.first() != Some(&"t") {
        bail!("{}:1: first column must be `t`", path.display());
    }
    let mut times: Vec<f64> = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len() - 1];
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() {
            bail!(
                "{}:{}: expected {} fields",
                path.display(),
                i + 1,
                names.len()
            );
        }
        for (j, f) in fields.iter().enumerate() {
            let v: f64 = f
                .trim()
                .parse()
                .with_context(|| format!("{}:{}: bad number `{f}`", path.display(), i + 1))?;
            if j == 0 {
                times.push(v);
            } else {
                columns[j - 1].push(v);
            }
        }
    }
    if times.len() < 2 {
        bail!("{}: need at least two samples", path.display());
    }
    let dt = times[1] - times[0];
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 {
            bail!("{}: non-uniform time column", path.display());
        }
    }
    let mut trace = Trace::new(dt, times.len()).map_err(|e| anyhow::anyhow!("{e}"))?;
    for (name, series) in names[1..].iter().zip(columns) {
        trace
            .insert_channel(name.to_string(), series)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
    }
    Ok(trace)
}

/// Planned trajectory as CSV; the final row has no control columns.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut out = String::from("t,x,y,alpha,v,omega\n");
    for (k, s) in traj.states.iter().enumerate() {
        let t = k as f64 * traj.dt;
        match traj.controls.get(k) {
            Some(u) => out.push_str(&format!(
                "{t},{},{},{},{},{}\n",
                s.x, s.y, s.alpha, u.v, u.omega
            )),
            None => out.push_str(&format!("{t},{},{},{},,\n", s.x, s.y, s.alpha)),
        }
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// Optimization history as `iter,value,wall_time_s`.
pub fn write_history_csv(
    path: &Path,
    history: &[tlplan_core::optimize::HistoryEntry],
) -> Result<()> {
    let mut out = String::from("iter,value,wall_time_s\n");
    for h in history {
        out.push_str(&format!("{},{},{}\n", h.iteration, h.value, h.wall_time_s));
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// Cycle table matching the runtime-report shape.
pub fn write_cycles_csv(path: &Path, reports: &[CycleReport]) -> Result<()> {
    let mut out = String::from(
        "cycle,initial_robustness,optimized_robustness,optimization_time_s,simulation_time_s\n",
    );
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.cycle_index,
            cell(r.initial_robustness),
            cell(r.optimized_robustness),
            cell(r.optimization_time_s),
            cell(r.simulation_time_s),
        ));
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// Per-step obstacle distances.
pub fn write_distances_csv(path: &Path, executed: &ExecutedTrace) -> Result<()> {
    let ids: Vec<&str> = executed.distances.keys().map(|s| s.as_str()).collect();
    let mut out = String::from("step");
    for id in &ids {
        out.push(',');
        out.push_str(id);
    }
    out.push('\n');
    let steps = executed.trace.len();
    for k in 0..steps {
        out.push_str(&k.to_string());
        for id in &ids {
            out.push_str(&format!(",{}", executed.distances[*id][k]));
        }
        out.push('\n');
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}
