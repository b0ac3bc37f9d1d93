//! Gaussian-process surrogate with a squared-exponential kernel.
//!
//! Inputs are expected in the unit box (the search normalizes them);
//! outputs are standardized internally and all public predictions are
//! de-standardized. Hyper-parameters come from a small seeded-free grid
//! search over the log marginal likelihood; the observation noise is fixed
//! low because the objective is deterministic.

use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::OptError;
use crate::num;

/// Hyper-parameter grid for the marginal-likelihood search.
#[derive(Debug, Clone)]
pub struct GpHyperConfig {
    pub length_scales: Vec<f64>,
    pub signal_variances: Vec<f64>,
    pub noise_variance: f64,
}

impl Default for GpHyperConfig {
    fn default() -> Self {
        Self {
            length_scales: alloc::vec![0.05, 0.1, 0.2, 0.4, 0.8],
            signal_variances: alloc::vec![0.25, 1.0, 4.0],
            noise_variance: 1e-6,
        }
    }
}

/// Fitted surrogate.
pub struct GpSurrogate {
    inputs: Vec<Vec<f64>>,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    length_scale: f64,
    signal_variance: f64,
    y_mean: f64,
    y_scale: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()
}

fn kernel(a: &[f64], b: &[f64], ell: f64, sf2: f64) -> f64 {
    sf2 * num::exp(-0.5 * sq_dist(a, b) / (ell * ell))
}

fn try_chol(
    inputs: &[Vec<f64>],
    ell: f64,
    sf2: f64,
    noise: f64,
) -> Result<Cholesky<f64, Dyn>, OptError> {
    let n = inputs.len();
    let mut jitter = 0.0;
    loop {
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = kernel(&inputs[i], &inputs[j], ell, sf2);
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
            k[(i, i)] += noise + jitter;
        }
        match Cholesky::new(k) {
            Some(c) => return Ok(c),
            None => {
                jitter = if jitter == 0.0 { 1e-8 } else { jitter * 10.0 };
                if jitter > 1e-4 {
                    return Err(OptError::CholeskyFailed);
                }
            }
        }
    }
}

fn log_marginal_likelihood(chol: &Cholesky<f64, Dyn>, y: &DVector<f64>) -> f64 {
    let alpha = chol.solve(y);
    let logdet: f64 = chol.l().diagonal().iter().map(|d| num::ln(*d)).sum::<f64>() * 2.0;
    let n = y.len() as f64;
    -0.5 * y.dot(&alpha) - 0.5 * logdet - 0.5 * n * num::ln(2.0 * core::f64::consts::PI)
}

/// Fits the surrogate to unit-box inputs and raw objective values.
pub fn gp_fit(
    points: &[Vec<f64>],
    values: &[f64],
    config: &GpHyperConfig,
) -> Result<GpSurrogate, OptError> {
    if points.len() < 2 {
        return Err(OptError::TooFewPoints(points.len()));
    }
    debug_assert_eq!(points.len(), values.len());
    let n = values.len() as f64;
    let y_mean = values.iter().sum::<f64>() / n;
    let var = values
        .iter()
        .map(|v| (v - y_mean) * (v - y_mean))
        .sum::<f64>()
        / n;
    let y_scale = if var > 1e-24 { num::sqrt(var) } else { 1.0 };
    let y_std = DVector::from_iterator(values.len(), values.iter().map(|v| (v - y_mean) / y_scale));

    let mut best: Option<(f64, f64, f64)> = None; // (lml, ell, sf2)
    for &ell in &config.length_scales {
        for &sf2 in &config.signal_variances {
            let Ok(chol) = try_chol(points, ell, sf2, config.noise_variance) else {
                continue;
            };
            let lml = log_marginal_likelihood(&chol, &y_std);
            if best.is_none_or(|(b, _, _)| lml > b) {
                best = Some((lml, ell, sf2));
            }
        }
    }
    let (_, ell, sf2) = best.ok_or(OptError::CholeskyFailed)?;
    let chol = try_chol(points, ell, sf2, config.noise_variance)?;
    let alpha = chol.solve(&y_std);
    Ok(GpSurrogate {
        inputs: points.to_vec(),
        chol,
        alpha,
        length_scale: ell,
        signal_variance: sf2,
        y_mean,
        y_scale,
    })
}

impl GpSurrogate {
    /// Posterior mean and standard deviation (objective units) at a
    /// unit-box point.
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let n = self.inputs.len();
        let k = DVector::from_iterator(
            n,
            self.inputs
                .iter()
                .map(|p| kernel(p, x, self.length_scale, self.signal_variance)),
        );
        let mean_std = k.dot(&self.alpha);
        let mut v = k.clone();
        let solved = self.chol.l().solve_lower_triangular(&k).unwrap_or_else(|| {
            v.fill(0.0);
            v.clone()
        });
        let var_std = (self.signal_variance - solved.norm_squared()).max(0.0);
        (
            self.y_mean + self.y_scale * mean_std,
            self.y_scale * num::sqrt(var_std),
        )
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// Expected improvement over `best` at a unit-box point (for maximization).
/// Returns 0 where the posterior is (numerically) certain.
pub fn expected_improvement(s: &GpSurrogate, x: &[f64], best: f64) -> f64 {
    let (mean, sigma) = s.predict(x);
    if sigma < 1e-12 {
        return 0.0;
    }
    let z = (mean - best) / sigma;
    ((mean - best) * num::normal_cdf(z) + sigma * num::normal_pdf(z)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn grid_points(values: &[f64]) -> Vec<Vec<f64>> {
        values.iter().map(|&v| vec![v]).collect()
    }

    #[test]
    fn interpolates_training_data_at_low_noise() {
        let xs = grid_points(&[0.0, 0.25, 0.5, 0.75, 1.0]);
        let ys: Vec<f64> = xs.iter().map(|p| num::sin(6.0 * p[0])).collect();
        let gp = gp_fit(&xs, &ys, &GpHyperConfig::default()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            let (m, _) = gp.predict(x);
            assert!((m - y).abs() < 1e-3, "at {x:?}: {m} vs {y}");
        }
    }

    #[test]
    fn constant_data_predicts_constant() {
        let xs = grid_points(&[0.1, 0.5, 0.9]);
        let ys = vec![2.5, 2.5, 2.5];
        let gp = gp_fit(&xs, &ys, &GpHyperConfig::default()).unwrap();
        for probe in [0.0, 0.3, 0.77] {
            let (m, _) = gp.predict(&[probe]);
            assert!((m - 2.5).abs() < 1e-3, "{m}");
        }
    }

    #[test]
    fn variance_grows_away_from_data() {
        let xs = grid_points(&[0.4, 0.5, 0.6]);
        let ys = vec![0.1, 0.2, 0.15];
        let gp = gp_fit(&xs, &ys, &GpHyperConfig::default()).unwrap();
        let (_, sigma_near) = gp.predict(&[0.5]);
        let (_, sigma_far) = gp.predict(&[0.0]);
        assert!(sigma_near < sigma_far, "{sigma_near} vs {sigma_far}");
    }

    #[test]
    fn ei_zero_without_uncertainty_and_positive_elsewhere() {
        let xs = grid_points(&[0.2, 0.8]);
        let ys = vec![1.0, 0.0];
        let gp = gp_fit(&xs, &ys, &GpHyperConfig::default()).unwrap();
        // the noise floor keeps a little posterior deviation even at
        // training inputs; EI there is bounded by sigma_n * pdf(0)
        let at_best = expected_improvement(&gp, &[0.2], 1.0);
        assert!(at_best < 1e-3, "{at_best}");
        let away = expected_improvement(&gp, &[0.5], 1.0);
        assert!(away >= 0.0);
    }

    #[test]
    fn ei_matches_standard_normal_density_at_mean_equal_best() {
        // with m = best the closed form collapses to sigma * pdf(0)
        let xs = grid_points(&[0.0, 1.0]);
        let ys = vec![0.0, 0.0];
        let gp = gp_fit(&xs, &ys, &GpHyperConfig::default()).unwrap();
        let (m, sigma) = gp.predict(&[0.5]);
        if sigma > 1e-9 {
            let ei = expected_improvement(&gp, &[0.5], m);
            assert!((ei - sigma * num::normal_pdf(0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn too_few_points_rejected() {
        assert!(matches!(
            gp_fit(&grid_points(&[0.5]), &[1.0], &GpHyperConfig::default()),
            Err(OptError::TooFewPoints(1))
        ));
    }
}
