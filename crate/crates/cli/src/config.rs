//! Run configuration: one JSON document with per-subsystem sections, dotted
//! `--set section.key=value` overrides, and a `PLANNER_SEED` environment
//! override for CI.
//!
//! Relative paths inside the file resolve against the config file's
//! directory, so bundles stay self-contained.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tlplan_core::optimize::{Method, OptSettings};
use tlplan_core::plansim::PlannerConfig;
use tlplan_core::reproduce::{KinematicLimits, TrackerWeights};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsSection {
    pub demos_dir: PathBuf,
    pub scenario: PathBuf,
    pub model: PathBuf,
    pub output_dir: PathBuf,
    pub spec_override: Option<PathBuf>,
}

impl Default for PathsSection {
    fn default() -> Self {
        Self {
            demos_dir: "demos".into(),
            scenario: "scenario.json".into(),
            model: "out/model.json".into(),
            output_dir: "out".into(),
            spec_override: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LfdSection {
    pub components: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for LfdSection {
    fn default() -> Self {
        Self {
            components: 6,
            max_iters: 200,
            tol: 1e-9,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrackerSection {
    pub v_max: f64,
    pub omega_max: f64,
    pub q: [f64; 3],
    pub r: [f64; 2],
    pub terminal_scale: f64,
    pub iters: usize,
    pub waypoint_tolerance: f64,
}

impl Default for TrackerSection {
    fn default() -> Self {
        let w = TrackerWeights::default();
        Self {
            v_max: 1.5,
            omega_max: 1.5,
            q: w.q,
            r: w.r,
            terminal_scale: w.terminal_scale,
            iters: 30,
            waypoint_tolerance: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSection {
    pub method: Method,
    pub budget: usize,
    pub seed: u64,
    pub deadline_s: Option<f64>,
    pub stop_when_satisfied: bool,
    pub batch: usize,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        Self {
            method: Method::Bayesian,
            budget: 60,
            seed: 0,
            deadline_s: None,
            stop_when_satisfied: false,
            batch: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerSection {
    pub cycles: usize,
    pub sensing_range: Option<f64>,
    pub trigger_radius: f64,
    pub mean_margin: f64,
}

impl Default for PlannerSection {
    fn default() -> Self {
        Self {
            cycles: 4,
            sensing_range: None,
            trigger_radius: 5.0,
            mean_margin: 2.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StlSection {
    pub nu: f64,
}

impl Default for StlSection {
    fn default() -> Self {
        Self { nu: 5.0 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub paths: PathsSection,
    pub lfd: LfdSection,
    pub tracker: TrackerSection,
    pub optimizer: OptimizerSection,
    pub planner: PlannerSection,
    pub stl: StlSection,
}

impl RunConfig {
    /// Loads a config file, applies `--set` overrides, the `PLANNER_SEED`
    /// environment override, and resolves relative paths against the config
    /// file's directory.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut value: serde_json::Value = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        for item in overrides {
            apply_override(&mut value, item)?;
        }
        let mut config: RunConfig = serde_json::from_value(value)
            .with_context(|| format!("validating config {}", path.display()))?;
        if let Ok(seed) = std::env::var("PLANNER_SEED") {
            let seed: u64 = seed
                .parse()
                .context("PLANNER_SEED must be an unsigned integer")?;
            config.lfd.seed = seed;
            config.optimizer.seed = seed;
        }
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        config.paths.demos_dir = resolve(base, &config.paths.demos_dir);
        config.paths.scenario = resolve(base, &config.paths.scenario);
        config.paths.model = resolve(base, &config.paths.model);
        config.paths.output_dir = resolve(base, &config.paths.output_dir);
        config.paths.spec_override = config
            .paths
            .spec_override
            .as_ref()
            .map(|p| resolve(base, p));
        // reject NaN as well as non-positive values
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(config.stl.nu > 0.0) {
            bail!("stl.nu must be positive");
        }
        Ok(config)
    }

    pub fn planner_config(&self) -> Result<PlannerConfig> {
        Ok(PlannerConfig {
            limits: KinematicLimits::new(self.tracker.v_max, self.tracker.omega_max)
                .map_err(|e| anyhow::anyhow!("{e}"))?,
            weights: TrackerWeights {
                q: self.tracker.q,
                r: self.tracker.r,
                terminal_scale: self.tracker.terminal_scale,
            },
            tracker_iters: self.tracker.iters,
            nu: self.stl.nu,
            mean_margin: self.planner.mean_margin,
            sensing_range: self.planner.sensing_range,
            trigger_radius: self.planner.trigger_radius,
        })
    }

    pub fn opt_settings(&self) -> OptSettings {
        OptSettings {
            method: self.optimizer.method,
            budget: self.optimizer.budget,
            seed: self.optimizer.seed,
            deadline_s: self.optimizer.deadline_s,
            stop_when_satisfied: self.optimizer.stop_when_satisfied,
            batch: self.optimizer.batch,
        }
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Applies one `section.key=value` override onto the raw JSON document.
/// Values parse as JSON when possible and fall back to strings.
fn apply_override(root: &mut serde_json::Value, item: &str) -> Result<()> {
    let Some((path, raw)) = item.split_once('=') else {
        bail!("override `{item}` must look like section.key=value");
    };
    let parsed: serde_json::Value =
        serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
    let mut cursor = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if !cursor.is_object() {
            bail!("override `{item}`: `{part}` is not an object");
        }
        let map = cursor.as_object_mut().unwrap();
        if i + 1 == parts.len() {
            map.insert((*part).to_string(), parsed);
            return Ok(());
        }
        cursor = map
            .entry((*part).to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    Ok(())
}
