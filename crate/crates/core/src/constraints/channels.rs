//! World channels: per-timestep obstacle bounds and centers.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::types::{ObstacleSpec, Rect};

/// Channels carrying an obstacle's extrapolated footprint, one value per
/// trace sample: `{id}_xlb/{id}_xub/{id}_ylb/{id}_yub` (inflated bounds) plus
/// `{id}_xc/{id}_yc` (uninflated center).
pub fn obstacle_channels(o: &ObstacleSpec, samples: usize, dt: f64) -> BTreeMap<String, Vec<f64>> {
    obstacle_channels_from(&o.id, &o.box0, o.velocity, o.inflation, samples, dt, 0.0)
}

/// As [`obstacle_channels`], extrapolating from an arbitrary snapshot box
/// with a lead time: the value at sample `k` uses `t = lead_s + k * dt`.
pub fn obstacle_channels_from(
    id: &str,
    snapshot: &Rect,
    velocity: (f64, f64),
    inflation: f64,
    samples: usize,
    dt: f64,
    lead_s: f64,
) -> BTreeMap<String, Vec<f64>> {
    let mut xlb = Vec::with_capacity(samples);
    let mut xub = Vec::with_capacity(samples);
    let mut ylb = Vec::with_capacity(samples);
    let mut yub = Vec::with_capacity(samples);
    let mut xc = Vec::with_capacity(samples);
    let mut yc = Vec::with_capacity(samples);
    for k in 0..samples {
        let t = lead_s + k as f64 * dt;
        let b = snapshot.translated(velocity.0 * t, velocity.1 * t);
        xlb.push(b.x_lb - inflation);
        xub.push(b.x_ub + inflation);
        ylb.push(b.y_lb - inflation);
        yub.push(b.y_ub + inflation);
        let (cx, cy) = b.center();
        xc.push(cx);
        yc.push(cy);
    }
    let mut out = BTreeMap::new();
    out.insert(format!("{id}_xlb"), xlb);
    out.insert(format!("{id}_xub"), xub);
    out.insert(format!("{id}_ylb"), ylb);
    out.insert(format!("{id}_yub"), yub);
    out.insert(format!("{id}_xc"), xc);
    out.insert(format!("{id}_yc"), yc);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box_obstacle(velocity: (f64, f64), inflation: f64) -> ObstacleSpec {
        ObstacleSpec {
            id: "o1".into(),
            box0: Rect::new(-0.5, 0.5, -0.5, 0.5).unwrap(),
            velocity,
            inflation,
        }
    }

    #[test]
    fn static_obstacle_constant_series() {
        let ch = obstacle_channels(&unit_box_obstacle((0.0, 0.0), 0.0), 5, 1.0);
        let xlb = &ch["o1_xlb"];
        assert!(xlb.iter().all(|&v| v == -0.5));
        assert_eq!(ch.len(), 6);
    }

    #[test]
    fn constant_velocity_extrapolation() {
        let ch = obstacle_channels(&unit_box_obstacle((1.0, 0.0), 0.0), 5, 1.0);
        assert_eq!(ch["o1_xc"][2], 2.0);
        assert_eq!(ch["o1_yc"][2], 0.0);
    }

    #[test]
    fn inflation_widens_symmetrically() {
        let ch = obstacle_channels(&unit_box_obstacle((0.0, 0.0), 0.2), 1, 1.0);
        assert!((ch["o1_xub"][0] - ch["o1_xlb"][0] - 1.4).abs() < 1e-12);
        // centers stay uninflated
        assert_eq!(ch["o1_xc"][0], 0.0);
    }

    #[test]
    fn lead_time_offsets_extrapolation() {
        let o = unit_box_obstacle((0.0, -2.0), 0.0);
        let ch = obstacle_channels_from(&o.id, &o.box0, o.velocity, o.inflation, 3, 0.5, 5.0);
        assert_eq!(ch["o1_yc"][0], -10.0);
        assert_eq!(ch["o1_yc"][2], -12.0);
    }
}
