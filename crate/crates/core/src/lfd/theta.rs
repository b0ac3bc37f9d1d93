//! The optimizable parameter subset: transition rows as logits, spatial
//! means in (x, y), and log duration means. Covariances, duration variances,
//! and the heading component of the means stay fixed.

use alloc::vec::Vec;

use super::model::HsmmModel;
use super::LfdError;
use crate::num;

/// Slice layout of a flattened parameter vector for a `k`-component model:
/// `k*k` transition logits (row-major), then `2k` means `(x, y)`, then `k`
/// log duration means.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThetaLayout {
    pub k: usize,
}

impl ThetaLayout {
    pub fn len(&self) -> usize {
        self.k * self.k + 3 * self.k
    }

    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    pub fn trans_range(&self) -> core::ops::Range<usize> {
        0..self.k * self.k
    }

    pub fn means_range(&self) -> core::ops::Range<usize> {
        self.k * self.k..self.k * self.k + 2 * self.k
    }

    pub fn dur_range(&self) -> core::ops::Range<usize> {
        self.k * self.k + 2 * self.k..self.len()
    }
}

/// Flattened optimizable parameters with per-entry search bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    pub values: Vec<f64>,
    pub layout: ThetaLayout,
    /// Per-entry `(lo, hi)` search bounds. The encoded initial point may lie
    /// outside the logit box when the fitted transition matrix carries
    /// (near-)zero entries; proposals always stay inside.
    pub bounds: Vec<(f64, f64)>,
}

/// Bounds configuration for the encoded parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaBounds {
    /// Lower-left corner of the admissible mean box (map bounds minus margin).
    pub xy_lo: (f64, f64),
    /// Upper-right corner of the admissible mean box (map bounds plus margin).
    pub xy_hi: (f64, f64),
    /// Upper bound for duration means, in steps (typically the horizon).
    pub max_duration_steps: f64,
    /// Half-width of the logit search box.
    pub logit_bound: f64,
}

impl ThetaBounds {
    pub fn new(xy_lo: (f64, f64), xy_hi: (f64, f64), max_duration_steps: f64) -> Self {
        Self {
            xy_lo,
            xy_hi,
            max_duration_steps: max_duration_steps.max(1.0),
            logit_bound: 10.0,
        }
    }
}

// encode floor keeps zero probabilities representable while staying below
// any meaningful round-trip tolerance: softmax(ln 1.39e-11) != 0 by ~1e-11
const LOGIT_FLOOR: f64 = -25.0;

/// Flattens the optimizable subset of a model into a bounded vector.
pub fn extract_theta(model: &HsmmModel, bounds: &ThetaBounds) -> ParamVector {
    let k = model.k();
    let layout = ThetaLayout { k };
    let mut values = Vec::with_capacity(layout.len());
    let mut bnds = Vec::with_capacity(layout.len());

    for row in &model.trans {
        for &p in row {
            let logit = num::ln(p.max(num::exp(LOGIT_FLOOR)));
            values.push(logit);
            bnds.push((-bounds.logit_bound, bounds.logit_bound));
        }
    }
    for mean in &model.means {
        values.push(mean[0]);
        bnds.push((bounds.xy_lo.0, bounds.xy_hi.0));
        values.push(mean[1]);
        bnds.push((bounds.xy_lo.1, bounds.xy_hi.1));
    }
    let dur_hi = num::ln(bounds.max_duration_steps);
    for &d in &model.dur_mean {
        values.push(num::ln(d).clamp(0.0, dur_hi));
        bnds.push((0.0, dur_hi));
    }

    ParamVector {
        values,
        layout,
        bounds: bnds,
    }
}

/// Writes a parameter vector back onto a model, leaving everything outside
/// the optimizable subset untouched.
pub fn apply_theta(model: &HsmmModel, theta: &ParamVector) -> Result<HsmmModel, LfdError> {
    let k = model.k();
    if theta.layout.k != k || theta.values.len() != theta.layout.len() {
        return Err(LfdError::LayoutMismatch {
            expected: k,
            got: theta.layout.k,
        });
    }
    let mut out = model.clone();

    let logits = &theta.values[theta.layout.trans_range()];
    for j in 0..k {
        let row = &logits[j * k..(j + 1) * k];
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut exps: Vec<f64> = row.iter().map(|&l| num::exp(l - max)).collect();
        let sum: f64 = exps.iter().sum();
        for e in &mut exps {
            *e /= sum;
        }
        out.trans[j] = exps;
    }

    let means = &theta.values[theta.layout.means_range()];
    for j in 0..k {
        out.means[j][0] = means[2 * j];
        out.means[j][1] = means[2 * j + 1];
    }

    let durs = &theta.values[theta.layout.dur_range()];
    for j in 0..k {
        out.dur_mean[j] = num::exp(durs[j]).max(1.0);
    }

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn model() -> HsmmModel {
        let eye = [[0.1, 0.0, 0.0], [0.0, 0.1, 0.0], [0.0, 0.0, 0.1]];
        HsmmModel {
            trans: vec![
                vec![0.5, 0.5, 0.0],
                vec![0.1, 0.7, 0.2],
                vec![0.0, 0.0, 1.0],
            ],
            means: vec![[0.0, 1.0, 0.2], [4.0, 2.0, -0.1], [8.0, 0.5, 0.0]],
            covs: vec![eye, eye, eye],
            dur_mean: vec![7.0, 5.0, 9.0],
            dur_var: vec![1.0, 1.0, 1.0],
            dt: 0.5,
        }
    }

    fn bounds() -> ThetaBounds {
        ThetaBounds::new((-2.0, -2.0), (14.0, 12.0), 40.0)
    }

    #[test]
    fn round_trip_identity() {
        let m = model();
        let theta = extract_theta(&m, &bounds());
        let back = apply_theta(&m, &theta).unwrap();
        for j in 0..3 {
            for i in 0..3 {
                assert!(
                    (back.trans[j][i] - m.trans[j][i]).abs() < 1e-9,
                    "trans[{j}][{i}]: {} vs {}",
                    back.trans[j][i],
                    m.trans[j][i]
                );
            }
            assert_eq!(back.means[j][0], m.means[j][0]);
            assert_eq!(back.means[j][1], m.means[j][1]);
            assert_eq!(back.means[j][2], m.means[j][2]);
            assert!((back.dur_mean[j] - m.dur_mean[j]).abs() < 1e-9);
        }
        // untouched parts are bit-identical
        assert_eq!(back.covs, m.covs);
        assert_eq!(back.dur_var, m.dur_var);
    }

    #[test]
    fn symmetric_row_gives_equal_logits() {
        let theta = extract_theta(&model(), &bounds());
        let logits = &theta.values[theta.layout.trans_range()];
        assert_eq!(logits[0], logits[1]); // 0.5 and 0.5
    }

    #[test]
    fn dur_log_is_natural_log_of_steps() {
        let theta = extract_theta(&model(), &bounds());
        let durs = &theta.values[theta.layout.dur_range()];
        assert!((durs[0] - num::ln(7.0)).abs() < 1e-15);
    }

    #[test]
    fn zero_logits_give_uniform_row() {
        let m = model();
        let mut theta = extract_theta(&m, &bounds());
        for v in &mut theta.values[theta.layout.trans_range()] {
            *v = 0.0;
        }
        let out = apply_theta(&m, &theta).unwrap();
        for row in &out.trans {
            for &p in row {
                assert!((p - 1.0 / 3.0).abs() < 1e-12);
            }
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn perturbing_one_mean_is_local() {
        let m = model();
        let mut theta = extract_theta(&m, &bounds());
        let means_start = theta.layout.means_range().start;
        theta.values[means_start + 3] += 1.0; // component 1, y
        let out = apply_theta(&m, &theta).unwrap();
        assert_eq!(out.means[0], m.means[0]);
        assert!((out.means[1][1] - (m.means[1][1] + 1.0)).abs() < 1e-12);
        assert_eq!(out.means[1][0], m.means[1][0]);
        assert_eq!(out.means[2], m.means[2]);
    }

    #[test]
    fn layout_mismatch_rejected() {
        let m = model();
        let mut theta = extract_theta(&m, &bounds());
        theta.layout = ThetaLayout { k: 2 };
        assert!(matches!(
            apply_theta(&m, &theta),
            Err(LfdError::LayoutMismatch { .. })
        ));
    }
}
