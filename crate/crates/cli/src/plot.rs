//! Static SVG plots: map view with trajectories, distance-over-time curves,
//! and the optimization history. Output is deterministic (no timestamps or
//! generator metadata).

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use tlplan_core::constraints::{Rect, Scenario};
use tlplan_core::lfd::Demonstration;
use tlplan_core::optimize::HistoryEntry;
use tlplan_core::plansim::ExecutedTrace;
use tlplan_core::reproduce::Trajectory;

const W: f64 = 640.0;
const H: f64 = 520.0;
const MARGIN: f64 = 40.0;

struct MapView {
    x_lb: f64,
    y_lb: f64,
    sx: f64,
    sy: f64,
}

impl MapView {
    fn new(bounds: &Rect) -> Self {
        let sx = (W - 2.0 * MARGIN) / (bounds.x_ub - bounds.x_lb);
        let sy = (H - 2.0 * MARGIN) / (bounds.y_ub - bounds.y_lb);
        Self {
            x_lb: bounds.x_lb,
            y_lb: bounds.y_lb,
            sx,
            sy,
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x_lb) * self.sx
    }

    /// SVG y grows downward; the map y grows upward.
    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y_lb) * self.sy
    }

    fn rect(&self, out: &mut String, r: &Rect, style: &str) {
        let _ = write!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" {style}/>"#,
            self.px(r.x_lb),
            self.py(r.y_ub),
            (r.x_ub - r.x_lb) * self.sx,
            (r.y_ub - r.y_lb) * self.sy,
        );
        out.push('\n');
    }

    fn polyline(&self, out: &mut String, points: impl Iterator<Item = (f64, f64)>, style: &str) {
        let mut path = String::new();
        for (x, y) in points {
            let _ = write!(path, "{:.2},{:.2} ", self.px(x), self.py(y));
        }
        let _ = write!(
            out,
            r#"<polyline points="{}" fill="none" {style}/>"#,
            path.trim_end()
        );
        out.push('\n');
    }
}

fn svg_header(title: &str) -> String {
    format!(
        concat!(
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" "#,
            r#"viewBox="0 0 {w} {h}">"#,
            "\n",
            r#"<rect width="{w}" height="{h}" fill="white"/>"#,
            "\n",
            r#"<text x="{m}" y="24" font-family="sans-serif" font-size="16">{title}</text>"#,
            "\n"
        ),
        w = W,
        h = H,
        m = MARGIN,
        title = title
    )
}

/// Map view: obstacles at the start and end of the horizon, rule regions,
/// light regions, demos, and the pre/post-optimization trajectories.
pub fn write_trajectory_svg(
    path: &Path,
    scenario: &Scenario,
    demos: &[Demonstration],
    initial: &Trajectory,
    best: &Trajectory,
) -> Result<()> {
    let view = MapView::new(&scenario.map_bounds);
    let mut out = svg_header("trajectory (dashed: before, solid: after)");
    view.rect(
        &mut out,
        &scenario.map_bounds,
        r#"fill="none" stroke="black" stroke-width="1""#,
    );
    for r in &scenario.road_rule_regions {
        view.rect(
            &mut out,
            r,
            r##"fill="#f3d9d9" stroke="#aa6666" stroke-dasharray="6 3""##,
        );
    }
    for tl in &scenario.traffic_lights {
        view.rect(&mut out, &tl.avoid, r##"fill="#f6c8c8" stroke="#cc3333""##);
        view.rect(&mut out, &tl.stay, r##"fill="#d2ecd2" stroke="#339933""##);
    }
    for o in &scenario.obstacles {
        view.rect(&mut out, &o.box0, r##"fill="#e08080" stroke="#992222""##);
        if !o.is_static() {
            let end = o.box_at(scenario.horizon_t);
            view.rect(
                &mut out,
                &end,
                r##"fill="none" stroke="#992222" stroke-dasharray="4 3""##,
            );
        }
    }
    for demo in demos {
        view.polyline(
            &mut out,
            demo.states.iter().map(|s| (s[0], s[1])),
            r##"stroke="#b0c4de" stroke-width="1.2""##,
        );
    }
    view.polyline(
        &mut out,
        initial.states.iter().map(|s| (s.x, s.y)),
        r##"stroke="#cc3333" stroke-width="1.5" stroke-dasharray="7 4""##,
    );
    view.polyline(
        &mut out,
        best.states.iter().map(|s| (s.x, s.y)),
        r##"stroke="#2a8f2a" stroke-width="2""##,
    );
    let _ = write!(
        out,
        r##"<circle cx="{:.2}" cy="{:.2}" r="5" fill="#2255cc"/>"##,
        view.px(scenario.start.x),
        view.py(scenario.start.y)
    );
    let _ = write!(
        out,
        r##"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="none" stroke="#2255cc" stroke-width="2"/>"##,
        view.px(scenario.goal.x),
        view.py(scenario.goal.y),
        scenario.goal.radius * view.sx
    );
    out.push_str("\n</svg>\n");
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// Distance-to-obstacle curves before (dotted) and after (solid)
/// optimization, with a marker line at the closest safety-distance bound.
pub fn write_distances_svg(
    path: &Path,
    scenario: &Scenario,
    before: &ExecutedTrace,
    after: &ExecutedTrace,
) -> Result<()> {
    let steps = after.trace.len();
    let horizon = scenario.horizon_t;
    let dmax = before
        .distances
        .values()
        .chain(after.distances.values())
        .flat_map(|v| v.iter().copied())
        .fold(1.0f64, f64::max);
    let sx = (W - 2.0 * MARGIN) / horizon;
    let sy = (H - 2.0 * MARGIN) / dmax;
    let px = |t: f64| MARGIN + t * sx;
    let py = |d: f64| H - MARGIN - d * sy;

    let mut out = svg_header("distance to obstacles (dotted: before, solid: after)");
    let _ = write!(
        out,
        r#"<line x1="{0:.2}" y1="{1:.2}" x2="{2:.2}" y2="{1:.2}" stroke="black"/>"#,
        px(0.0),
        py(0.0),
        px(horizon)
    );
    let palette = [
        "#cc3333", "#2a8f2a", "#2255cc", "#b8860b", "#7b2fbe", "#008b8b",
    ];
    for (i, (id, series)) in after.distances.iter().enumerate() {
        let color = palette[i % palette.len()];
        if let Some(prev) = before.distances.get(id) {
            let mut pts = String::new();
            for (k, d) in prev.iter().enumerate().take(steps) {
                let _ = write!(pts, "{:.2},{:.2} ", px(k as f64 * scenario.dt), py(*d));
            }
            let _ = write!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1" stroke-dasharray="2 3"/>"#,
                pts.trim_end()
            );
            out.push('\n');
        }
        let mut pts = String::new();
        for (k, d) in series.iter().enumerate() {
            let _ = write!(pts, "{:.2},{:.2} ", px(k as f64 * scenario.dt), py(*d));
        }
        let _ = write!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.6"/>"#,
            pts.trim_end()
        );
        out.push('\n');
        let _ = write!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" fill="{color}">{id}</text>"#,
            W - MARGIN - 90.0,
            MARGIN + 14.0 * (i as f64 + 1.0)
        );
        out.push('\n');
    }
    for sd in &scenario.safety_distances {
        let _ = write!(
            out,
            r##"<line x1="{:.2}" y1="{1:.2}" x2="{2:.2}" y2="{1:.2}" stroke="#2a8f2a" stroke-dasharray="8 4"/>"##,
            px(sd.window.0),
            py(sd.bound),
            px(sd.window.1)
        );
        out.push('\n');
    }
    out.push_str("</svg>\n");
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// Objective value per evaluation, with the running best overlaid.
pub fn write_history_svg(path: &Path, history: &[HistoryEntry]) -> Result<()> {
    let finite: Vec<(usize, f64)> = history
        .iter()
        .filter(|h| h.value.is_finite())
        .map(|h| (h.iteration, h.value))
        .collect();
    let (lo, hi) = finite
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, v)| {
            (lo.min(*v), hi.max(*v))
        });
    let (lo, hi) = if finite.is_empty() {
        (-1.0, 1.0)
    } else {
        (lo.min(0.0), hi.max(0.0) + 1e-9)
    };
    let n = history.len().max(2) as f64;
    let sx = (W - 2.0 * MARGIN) / (n - 1.0);
    let sy = (H - 2.0 * MARGIN) / (hi - lo);
    let px = |i: usize| MARGIN + i as f64 * sx;
    let py = |v: f64| H - MARGIN - (v - lo) * sy;

    let mut out = svg_header("optimization history (dots: evaluations, line: running best)");
    let _ = write!(
        out,
        r##"<line x1="{0:.2}" y1="{1:.2}" x2="{2:.2}" y2="{1:.2}" stroke="#888" stroke-dasharray="4 4"/>"##,
        px(0),
        py(0.0),
        W - MARGIN
    );
    out.push('\n');
    for (i, v) in &finite {
        let _ = write!(
            out,
            r##"<circle cx="{:.2}" cy="{:.2}" r="2" fill="#2255cc"/>"##,
            px(*i),
            py(*v)
        );
    }
    out.push('\n');
    let mut best = f64::NEG_INFINITY;
    let mut pts = String::new();
    for (i, v) in &finite {
        best = best.max(*v);
        let _ = write!(pts, "{:.2},{:.2} ", px(*i), py(best));
    }
    let _ = write!(
        out,
        r##"<polyline points="{}" fill="none" stroke="#2a8f2a" stroke-width="2"/>"##,
        pts.trim_end()
    );
    out.push_str("\n</svg>\n");
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}
