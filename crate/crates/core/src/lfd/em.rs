//! Expectation-maximization fit of the motion model.
//!
//! Responsibilities start from a uniform time-segmentation of every
//! demonstration into `k` contiguous blocks, which makes the fit fully
//! deterministic. The mixture is refined on pooled `(x, y, alpha)` samples;
//! transition and duration statistics are then read off the per-sample
//! maximum-responsibility labels.

use alloc::vec;
use alloc::vec::Vec;

use super::model::{Demonstration, HsmmModel};
use super::LfdError;
use crate::num;

/// Fit diagnostics: per-iteration log-likelihood (mean per sample) and the
/// label runs backing the duration statistics.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub log_likelihood: Vec<f64>,
    /// Per demonstration: `(component, start, length)` runs of the labels.
    pub segments: Vec<Vec<(usize, usize, usize)>>,
}

struct Stats {
    weight: f64,
    sum_x: f64,
    sum_y: f64,
    sum_sin: f64,
    sum_cos: f64,
}

fn wrapped_diff(x: &[f64; 3], mean: &[f64; 3]) -> [f64; 3] {
    [
        x[0] - mean[0],
        x[1] - mean[1],
        num::wrap_angle(x[2] - mean[2]),
    ]
}

/// Weighted mean with the angle averaged on the circle.
fn weighted_mean(samples: &[[f64; 3]], resp: &[f64]) -> ([f64; 3], f64) {
    let mut s = Stats {
        weight: 0.0,
        sum_x: 0.0,
        sum_y: 0.0,
        sum_sin: 0.0,
        sum_cos: 0.0,
    };
    for (x, &r) in samples.iter().zip(resp) {
        s.weight += r;
        s.sum_x += r * x[0];
        s.sum_y += r * x[1];
        s.sum_sin += r * num::sin(x[2]);
        s.sum_cos += r * num::cos(x[2]);
    }
    let mean = [
        s.sum_x / s.weight,
        s.sum_y / s.weight,
        num::atan2(s.sum_sin, s.sum_cos),
    ];
    (mean, s.weight)
}

fn weighted_cov(samples: &[[f64; 3]], resp: &[f64], mean: &[f64; 3], weight: f64) -> [[f64; 3]; 3] {
    let mut cov = [[0.0f64; 3]; 3];
    for (x, &r) in samples.iter().zip(resp) {
        let d = wrapped_diff(x, mean);
        for a in 0..3 {
            for b in 0..3 {
                cov[a][b] += r * d[a] * d[b];
            }
        }
    }
    for row in &mut cov {
        for v in row.iter_mut() {
            *v /= weight;
        }
    }
    // per-axis relative regularization keeps the likelihood perturbation
    // second order on every axis regardless of anisotropy, with an absolute
    // floor so constant demonstrations stay positive definite
    for a in 0..3 {
        cov[a][a] = cov[a][a] * (1.0 + 1e-6) + 1e-9;
    }
    cov
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + num::ln(values.iter().map(|&v| num::exp(v - max)).sum::<f64>())
}

/// Fits the motion model; see [`fit_hsmm_with_report`] for diagnostics.
///
/// `seed` is reserved for optional initialization jitter and does not affect
/// the default deterministic fit.
pub fn fit_hsmm(
    demos: &[Demonstration],
    k: usize,
    seed: u64,
    max_iters: usize,
    tol: f64,
) -> Result<HsmmModel, LfdError> {
    fit_hsmm_with_report(demos, k, seed, max_iters, tol).map(|(m, _)| m)
}

/// Fits the motion model and returns the fit diagnostics alongside it.
pub fn fit_hsmm_with_report(
    demos: &[Demonstration],
    k: usize,
    seed: u64,
    max_iters: usize,
    tol: f64,
) -> Result<(HsmmModel, FitReport), LfdError> {
    let _ = seed; // reserved for optional initialization jitter
    if demos.is_empty() {
        return Err(LfdError::TooFewSamples { got: 0, k });
    }
    if k == 0 {
        return Err(LfdError::InvalidModel("component count must be >= 1"));
    }
    let dt = demos[0].dt;
    if demos.iter().any(|d| num::abs(d.dt - dt) > 1e-12) {
        return Err(LfdError::MixedSamplingPeriods);
    }
    let shortest = demos.iter().map(|d| d.len()).min().unwrap();
    if k > shortest {
        return Err(LfdError::TooManyComponents { k, shortest });
    }
    let total: usize = demos.iter().map(|d| d.len()).sum();
    if total < 3 * k {
        return Err(LfdError::TooFewSamples { got: total, k });
    }

    // pooled samples plus the demo boundaries for the label pass
    let mut samples: Vec<[f64; 3]> = Vec::with_capacity(total);
    let mut demo_spans: Vec<(usize, usize)> = Vec::with_capacity(demos.len());
    for d in demos {
        let start = samples.len();
        samples.extend_from_slice(&d.states);
        demo_spans.push((start, d.len()));
    }

    // initial responsibilities: uniform time-segmentation per demonstration
    let mut resp = vec![vec![0.0f64; total]; k];
    for (start, len) in &demo_spans {
        for t in 0..*len {
            let j = (t * k / len).min(k - 1);
            resp[j][start + t] = 1.0;
        }
    }

    let mut means = vec![[0.0f64; 3]; k];
    let mut covs = vec![[[0.0f64; 3]; 3]; k];
    let mut mix = vec![0.0f64; k];
    let mut ll_curve: Vec<f64> = Vec::new();

    for _iter in 0..max_iters.max(1) {
        // M-step
        for j in 0..k {
            let (mean, weight) = weighted_mean(&samples, &resp[j]);
            if !(weight > 0.0) {
                return Err(LfdError::SingularCovariance { component: j });
            }
            means[j] = mean;
            covs[j] = weighted_cov(&samples, &resp[j], &mean, weight);
            mix[j] = weight / total as f64;
        }
        let gaussians: Vec<_> = (0..k)
            .map(|j| {
                super::model::Gaussian3::new(means[j], covs[j])
                    .ok_or(LfdError::SingularCovariance { component: j })
            })
            .collect::<Result<_, _>>()?;

        // E-step
        let mut ll = 0.0;
        let mut log_post = vec![0.0f64; k];
        for (t, x) in samples.iter().enumerate() {
            for j in 0..k {
                log_post[j] = num::ln(mix[j].max(1e-300)) + gaussians[j].logpdf(x);
            }
            let z = log_sum_exp(&log_post);
            ll += z;
            for j in 0..k {
                resp[j][t] = num::exp(log_post[j] - z);
            }
        }
        let mean_ll = ll / total as f64;
        let converged = ll_curve
            .last()
            .is_some_and(|prev| num::abs(mean_ll - prev) < tol);
        ll_curve.push(mean_ll);
        if converged {
            break;
        }
    }

    // hard labels from the final responsibilities
    let labels: Vec<usize> = (0..total)
        .map(|t| {
            let mut best = 0usize;
            let mut best_r = f64::NEG_INFINITY;
            for j in 0..k {
                if resp[j][t] > best_r {
                    best_r = resp[j][t];
                    best = j;
                }
            }
            best
        })
        .collect();

    // transition counts and duration run lengths per demonstration
    let mut counts = vec![vec![0.0f64; k]; k];
    let mut runs: Vec<Vec<f64>> = vec![Vec::new(); k];
    let mut segments: Vec<Vec<(usize, usize, usize)>> = Vec::with_capacity(demos.len());
    for (start, len) in &demo_spans {
        let demo_labels = &labels[*start..start + len];
        let mut segs = Vec::new();
        let mut run_start = 0usize;
        for t in 1..=*len {
            if t < *len {
                counts[demo_labels[t - 1]][demo_labels[t]] += 1.0;
            }
            if t == *len || demo_labels[t] != demo_labels[run_start] {
                segs.push((demo_labels[run_start], run_start, t - run_start));
                runs[demo_labels[run_start]].push((t - run_start) as f64);
                run_start = t;
            }
        }
        segments.push(segs);
    }

    let trans: Vec<Vec<f64>> = counts
        .into_iter()
        .enumerate()
        .map(|(j, row)| {
            let sum: f64 = row.iter().sum();
            if sum > 0.0 {
                row.into_iter().map(|c| c / sum).collect()
            } else {
                // component never leaves within the data: absorbing
                (0..k).map(|m| if m == j { 1.0 } else { 0.0 }).collect()
            }
        })
        .collect();

    let mut dur_mean = vec![1.0f64; k];
    let mut dur_var = vec![0.25f64; k];
    for j in 0..k {
        if runs[j].is_empty() {
            continue;
        }
        let n = runs[j].len() as f64;
        let mean = runs[j].iter().sum::<f64>() / n;
        let var = runs[j].iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
        dur_mean[j] = mean.max(1.0);
        dur_var[j] = var.max(0.25);
    }

    let model = HsmmModel {
        trans,
        means,
        covs,
        dur_mean,
        dur_var,
        dt,
    }
    .validated()?;
    Ok((
        model,
        FitReport {
            log_likelihood: ll_curve,
            segments,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lfd::model::component_sequence;

    fn constant_demo(value: [f64; 3], len: usize) -> Demonstration {
        Demonstration::new(0.5, vec![value; len]).unwrap()
    }

    #[test]
    fn degenerate_single_component() {
        let demos = [constant_demo([1.0, 2.0, 0.0], 12)];
        let (model, report) = fit_hsmm_with_report(&demos, 1, 0, 50, 1e-9).unwrap();
        assert!((model.means[0][0] - 1.0).abs() < 1e-12);
        assert!((model.means[0][1] - 2.0).abs() < 1e-12);
        assert!((model.means[0][2]).abs() < 1e-12);
        assert_eq!(model.trans, vec![vec![1.0]]);
        assert_eq!(model.dur_mean, vec![12.0]);
        assert!(!report.log_likelihood.is_empty());
    }

    #[test]
    fn duplicated_demos_give_identical_model() {
        let mut states = Vec::new();
        for t in 0..24 {
            let x = t as f64 * 0.3;
            states.push([x, 0.1 * num::sin(x), 0.2]);
        }
        let demo = Demonstration::new(0.5, states).unwrap();
        let one = fit_hsmm(std::slice::from_ref(&demo), 3, 0, 100, 1e-10).unwrap();
        let two = fit_hsmm(&[demo.clone(), demo], 3, 0, 100, 1e-10).unwrap();
        // sufficient statistics are duplication-invariant; allow float noise
        // from the doubled summation order
        for j in 0..3 {
            for a in 0..3 {
                assert!((one.means[j][a] - two.means[j][a]).abs() < 1e-9);
                for b in 0..3 {
                    assert!((one.covs[j][a][b] - two.covs[j][a][b]).abs() < 1e-9);
                }
                assert!((one.trans[j][a] - two.trans[j][a]).abs() < 1e-12);
            }
            assert!((one.dur_mean[j] - two.dur_mean[j]).abs() < 1e-12);
            assert!((one.dur_var[j] - two.dur_var[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn log_likelihood_non_decreasing() {
        // noise in every dimension: with an exactly degenerate axis the
        // trace-coupled regularizer dominates the likelihood and monotonicity
        // is not meaningful
        let mut rng_state = 42u64;
        let mut noise = || {
            rng_state = rng_state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((rng_state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 0.08
        };
        let mut states = Vec::new();
        for t in 0..30 {
            let x = t as f64 * 0.25;
            states.push([x + noise(), 0.05 * (t % 5) as f64 + noise(), 0.1 + noise()]);
        }
        let demos = [Demonstration::new(0.5, states).unwrap()];
        let (_, report) = fit_hsmm_with_report(&demos, 3, 0, 100, 1e-12).unwrap();
        for w in report.log_likelihood.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "log-likelihood dipped: {w:?}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let demos = [constant_demo([0.0, 0.0, 0.0], 5)];
        assert!(matches!(
            fit_hsmm(&demos, 6, 0, 10, 1e-8),
            Err(LfdError::TooManyComponents { .. })
        ));
        assert!(matches!(
            fit_hsmm(&demos, 2, 0, 10, 1e-8),
            Err(LfdError::TooFewSamples { .. })
        ));
        let mixed = [
            constant_demo([0.0, 0.0, 0.0], 12),
            Demonstration::new(0.25, vec![[0.0; 3]; 12]).unwrap(),
        ];
        assert!(matches!(
            fit_hsmm(&mixed, 1, 0, 10, 1e-8),
            Err(LfdError::MixedSamplingPeriods)
        ));
    }

    #[test]
    fn left_to_right_generator_recovery() {
        // three well-separated spatial clusters visited in order
        let centers = [[0.0, 0.0, 0.0], [4.0, 1.0, 0.4], [8.0, 0.0, -0.3]];
        let mut demos = Vec::new();
        let mut rng_state = 0x9e3779b97f4a7c15u64;
        let mut noise = || {
            // splitmix64-based uniform in [-0.05, 0.05]
            rng_state = rng_state.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = rng_state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            let u = ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64;
            (u - 0.5) * 0.1
        };
        for _ in 0..6 {
            let mut states = Vec::new();
            for (j, c) in centers.iter().enumerate() {
                let dur = 10 + (j % 2);
                for _ in 0..dur {
                    states.push([c[0] + noise(), c[1] + noise(), c[2] + noise()]);
                }
            }
            demos.push(Demonstration::new(0.5, states).unwrap());
        }
        let model = fit_hsmm(&demos, 3, 0, 200, 1e-10).unwrap();
        // align by nearest recovered mean
        for c in &centers {
            let best = model
                .means
                .iter()
                .map(|m| num::hypot(m[0] - c[0], m[1] - c[1]))
                .fold(f64::INFINITY, f64::min);
            assert!(best < 0.1, "no recovered mean near {c:?}");
        }
        for row in &model.trans {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        // left-to-right structure survives into the schedule
        let seq = component_sequence(&model, [0.0, 0.0, 0.0], 33).unwrap();
        assert_eq!(seq.len(), 3, "{seq:?}");
    }
}
