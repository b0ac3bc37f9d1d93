//! Model types: demonstrations, the fitted semi-Markov model, decoded state
//! sequences, and deterministic component scheduling.

use alloc::vec::Vec;

use nalgebra::{Cholesky, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::LfdError;
use crate::num;

/// A recorded demonstration: uniformly sampled `(x, y, alpha)` states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Demonstration {
    pub dt: f64,
    /// `(x, y, alpha)` per sample; alpha is wrapped to `(-pi, pi]`.
    pub states: Vec<[f64; 3]>,
}

impl Demonstration {
    pub fn new(dt: f64, mut states: Vec<[f64; 3]>) -> Result<Self, LfdError> {
        if states.len() < 2 {
            return Err(LfdError::DemoTooShort {
                need: 2,
                got: states.len(),
            });
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(LfdError::InvalidModel("dt must be positive and finite"));
        }
        for s in &mut states {
            s[2] = num::wrap_angle(s[2]);
        }
        Ok(Self { dt, states })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Hidden semi-Markov model over `(x, y, alpha)` with explicit per-component
/// duration distributions (in steps).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HsmmModel {
    /// Row-stochastic transition matrix, row-major, `k x k`.
    pub trans: Vec<Vec<f64>>,
    /// Spatial component means `(x, y, alpha)`.
    pub means: Vec<[f64; 3]>,
    /// Symmetric positive-definite spatial covariances.
    pub covs: Vec<[[f64; 3]; 3]>,
    /// Mean stay duration per component, in steps (>= 1).
    pub dur_mean: Vec<f64>,
    /// Duration variance per component, in steps^2 (> 0).
    pub dur_var: Vec<f64>,
    pub dt: f64,
}

impl HsmmModel {
    pub fn k(&self) -> usize {
        self.means.len()
    }

    /// Checks the structural invariants; returns the model on success.
    pub fn validated(self) -> Result<Self, LfdError> {
        let k = self.k();
        if k == 0 {
            return Err(LfdError::InvalidModel("model needs at least one component"));
        }
        if self.trans.len() != k
            || self.covs.len() != k
            || self.dur_mean.len() != k
            || self.dur_var.len() != k
        {
            return Err(LfdError::InvalidModel("field lengths disagree"));
        }
        for (i, row) in self.trans.iter().enumerate() {
            if row.len() != k {
                return Err(LfdError::InvalidModel("transition matrix is not square"));
            }
            let sum: f64 = row.iter().sum();
            if num::abs(sum - 1.0) > 1e-9 || row.iter().any(|&p| p < 0.0) {
                return Err(LfdError::InvalidModel("transition rows must be stochastic"));
            }
            let _ = i;
        }
        for (j, c) in self.covs.iter().enumerate() {
            if Gaussian3::new(self.means[j], *c).is_none() {
                return Err(LfdError::SingularCovariance { component: j });
            }
        }
        if self.dur_mean.iter().any(|&d| d < 1.0) {
            return Err(LfdError::InvalidModel("duration means must be >= 1 step"));
        }
        if self.dur_var.iter().any(|&v| !(v > 0.0)) {
            return Err(LfdError::InvalidModel(
                "duration variances must be positive",
            ));
        }
        if !(self.dt > 0.0) {
            return Err(LfdError::InvalidModel("dt must be positive"));
        }
        Ok(self)
    }

    pub(crate) fn gaussians(&self) -> Result<Vec<Gaussian3>, LfdError> {
        (0..self.k())
            .map(|j| {
                Gaussian3::new(self.means[j], self.covs[j])
                    .ok_or(LfdError::SingularCovariance { component: j })
            })
            .collect()
    }
}

/// Decoded hidden state labels, one per sample, `0..k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSeq {
    pub labels: Vec<usize>,
}

impl StateSeq {
    /// Contiguous runs as `(label, start, length)`.
    pub fn segments(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        let mut start = 0usize;
        for t in 1..=self.labels.len() {
            if t == self.labels.len() || self.labels[t] != self.labels[start] {
                out.push((self.labels[start], start, t - start));
                start = t;
            }
        }
        out
    }
}

/// Trivariate Gaussian with the angle component compared on the circle.
#[derive(Debug, Clone)]
pub struct Gaussian3 {
    mean: Vector3<f64>,
    chol: Cholesky<f64, nalgebra::U3>,
    log_norm: f64,
}

impl Gaussian3 {
    pub fn new(mean: [f64; 3], cov: [[f64; 3]; 3]) -> Option<Self> {
        let m = Matrix3::from_fn(|r, c| cov[r][c]);
        let chol = Cholesky::new(m)?;
        let logdet = 2.0 * chol.l().diagonal().iter().map(|d| num::ln(*d)).sum::<f64>();
        let log_norm = -0.5 * (3.0 * num::ln(2.0 * core::f64::consts::PI) + logdet);
        Some(Self {
            mean: Vector3::new(mean[0], mean[1], mean[2]),
            chol,
            log_norm,
        })
    }

    pub fn logpdf(&self, x: &[f64; 3]) -> f64 {
        let d = Vector3::new(
            x[0] - self.mean.x,
            x[1] - self.mean.y,
            num::wrap_angle(x[2] - self.mean.z),
        );
        let solved = self.chol.solve(&d);
        self.log_norm - 0.5 * d.dot(&solved)
    }
}

/// Discrete Gaussian duration score `N(s | mean, var)` truncated to
/// `[1, s_max]`.
pub(crate) struct DurationScore {
    log_probs: Vec<f64>, // index s-1 for s in 1..=s_max
}

impl DurationScore {
    pub fn new(mean: f64, var: f64, s_max: usize) -> Self {
        let mut raw: Vec<f64> = (1..=s_max)
            .map(|s| {
                let d = s as f64 - mean;
                -0.5 * d * d / var - 0.5 * num::ln(2.0 * core::f64::consts::PI * var)
            })
            .collect();
        // normalize over the truncated support
        let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z = max + num::ln(raw.iter().map(|&l| num::exp(l - max)).sum::<f64>());
        for l in &mut raw {
            *l -= z;
        }
        Self { log_probs: raw }
    }

    pub fn log_prob(&self, s: usize) -> f64 {
        self.log_probs
            .get(s - 1)
            .copied()
            .unwrap_or(f64::NEG_INFINITY)
    }

    pub fn s_max(&self) -> usize {
        self.log_probs.len()
    }
}

/// Deterministic component schedule from a start state.
///
/// The first component maximizes the spatial likelihood of `start`; each
/// component holds for its rounded mean duration and then hands over to the
/// strongest off-diagonal successor (ties to the lowest index). When no
/// successor carries mass above 1e-6 the current component holds for the
/// remaining horizon. Durations sum to exactly `horizon_steps`.
pub fn component_sequence(
    model: &HsmmModel,
    start: [f64; 3],
    horizon_steps: usize,
) -> Result<Vec<(usize, usize)>, LfdError> {
    if horizon_steps == 0 {
        return Err(LfdError::InvalidModel("horizon must be at least 1 step"));
    }
    let gaussians = model.gaussians()?;
    let mut current = 0usize;
    let mut best = f64::NEG_INFINITY;
    for (j, g) in gaussians.iter().enumerate() {
        let ll = g.logpdf(&start);
        if ll > best {
            best = ll;
            current = j;
        }
    }

    let mut plan: Vec<(usize, usize)> = Vec::new();
    let mut used = 0usize;
    while used < horizon_steps {
        let dur = num::round(model.dur_mean[current]).max(1.0) as usize;
        let dur = dur.min(horizon_steps - used);

        let row = &model.trans[current];
        let mut next = None;
        let mut next_mass = 0.0;
        for (m, &p) in row.iter().enumerate() {
            if m != current && p > next_mass {
                next_mass = p;
                next = Some(m);
            }
        }
        match next {
            Some(m) if next_mass >= 1e-6 => {
                plan.push((current, dur));
                used += dur;
                current = m;
            }
            _ => {
                // no successor: hold to the end of the horizon
                plan.push((current, horizon_steps - used));
                used = horizon_steps;
            }
        }
    }
    // merge a possible repeat of the same component at the tail
    let mut merged: Vec<(usize, usize)> = Vec::with_capacity(plan.len());
    for (c, d) in plan {
        match merged.last_mut() {
            Some((lc, ld)) if *lc == c => *ld += d,
            _ => merged.push((c, d)),
        }
    }
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn eye() -> [[f64; 3]; 3] {
        [[0.1, 0.0, 0.0], [0.0, 0.1, 0.0], [0.0, 0.0, 0.1]]
    }

    fn three_state_left_to_right() -> HsmmModel {
        HsmmModel {
            trans: vec![
                vec![0.8, 0.2, 0.0],
                vec![0.0, 0.8, 0.2],
                vec![0.0, 0.0, 1.0],
            ],
            means: vec![[0.0, 0.0, 0.0], [4.0, 1.0, 0.3], [8.0, 0.0, -0.2]],
            covs: vec![eye(), eye(), eye()],
            dur_mean: vec![5.0, 5.0, 5.0],
            dur_var: vec![1.0, 1.0, 1.0],
            dt: 0.5,
        }
    }

    #[test]
    fn single_component_fills_horizon() {
        let model = HsmmModel {
            trans: vec![vec![1.0]],
            means: vec![[1.0, 2.0, 0.0]],
            covs: vec![eye()],
            dur_mean: vec![4.0],
            dur_var: vec![1.0],
            dt: 0.5,
        };
        let seq = component_sequence(&model, [1.0, 2.0, 0.0], 9).unwrap();
        assert_eq!(seq, vec![(0, 9)]);
    }

    #[test]
    fn left_to_right_schedule() {
        let model = three_state_left_to_right();
        let seq = component_sequence(&model, [0.1, 0.0, 0.0], 15).unwrap();
        assert_eq!(seq, vec![(0, 5), (1, 5), (2, 5)]);
        let total: usize = seq.iter().map(|(_, d)| d).sum();
        assert_eq!(total, 15);
    }

    #[test]
    fn dominant_skip_transition_skips_component() {
        let mut model = three_state_left_to_right();
        model.trans[0] = vec![0.7, 0.1, 0.2]; // skip 1 -> 3
        let seq = component_sequence(&model, [0.1, 0.0, 0.0], 15).unwrap();
        assert!(seq.iter().all(|(c, _)| *c != 1), "{seq:?}");
        let total: usize = seq.iter().map(|(_, d)| d).sum();
        assert_eq!(total, 15);
    }

    #[test]
    fn durations_always_sum_to_horizon() {
        let model = three_state_left_to_right();
        for horizon in [1, 2, 7, 11, 40] {
            let seq = component_sequence(&model, [7.9, 0.1, 0.0], horizon).unwrap();
            let total: usize = seq.iter().map(|(_, d)| d).sum();
            assert_eq!(total, horizon);
        }
    }

    #[test]
    fn validation_catches_bad_rows() {
        let mut model = three_state_left_to_right();
        model.trans[1] = vec![0.5, 0.4, 0.2];
        assert!(model.validated().is_err());
    }

    #[test]
    fn wrapped_gaussian_prefers_near_seam() {
        let g = Gaussian3::new([0.0, 0.0, 3.1], eye()).unwrap();
        // -3.1 rad is close to 3.1 rad on the circle
        assert!(g.logpdf(&[0.0, 0.0, -3.1]) > g.logpdf(&[0.0, 0.0, 1.0]));
    }

    #[test]
    fn segments_of_state_seq() {
        let seq = StateSeq {
            labels: vec![0, 0, 1, 1, 1, 0],
        };
        assert_eq!(seq.segments(), vec![(0, 0, 2), (1, 2, 3), (0, 5, 1)]);
    }
}
