//! The search loop: seeded initial design, surrogate refits, acquisition
//! maximization over seeded candidates, budget and deadline accounting.

use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::gp::{expected_improvement, gp_fit, GpHyperConfig};
use super::OptError;
use crate::num;
use crate::time::Clock;

/// Black-box maximization target over a bounded box. `initial` is always
/// evaluated first, so an anytime result is available immediately.
pub struct Objective<F: Fn(&[f64]) -> f64> {
    pub evaluate: F,
    pub bounds: Vec<(f64, f64)>,
    pub initial: Vec<f64>,
}

impl<F: Fn(&[f64]) -> f64> Objective<F> {
    pub fn dimension(&self) -> usize {
        self.bounds.len()
    }
}

/// Search strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Bayesian,
    Random,
}

/// Budget, seeding, and stopping configuration.
#[derive(Debug, Clone)]
pub struct OptSettings {
    pub method: Method,
    pub budget: usize,
    pub seed: u64,
    pub deadline_s: Option<f64>,
    pub stop_when_satisfied: bool,
    pub batch: usize,
}

impl Default for OptSettings {
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

/// One objective evaluation: which call it was, the raw value (possibly
/// non-finite), and seconds since the search started.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub value: f64,
    pub wall_time_s: f64,
}

/// Search outcome with its full evaluation history.
#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub initial_value: f64,
    pub history: Vec<HistoryEntry>,
    pub wall_time_total: f64,
}

fn primes(count: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(count);
    let mut n = 2usize;
    while out.len() < count {
        if out.iter().all(|p| !n.is_multiple_of(*p)) {
            out.push(n);
        }
        n += 1;
    }
    out
}

fn halton(index: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let mut i = index + 1; // skip the zero point
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

struct Search<'a, F: Fn(&[f64]) -> f64> {
    obj: &'a Objective<F>,
    clock: &'a dyn Clock,
    start_s: f64,
    deadline_s: Option<f64>,
    // evaluated points in unit-box coordinates, with raw values
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    history: Vec<HistoryEntry>,
    best_index: Option<usize>,
}

impl<'a, F: Fn(&[f64]) -> f64> Search<'a, F> {
    fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.obj.bounds)
            .map(
                |(v, (lo, hi))| {
                    if hi > lo {
                        (v - lo) / (hi - lo)
                    } else {
                        0.5
                    }
                },
            )
            .collect()
    }

    fn denormalize(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(&self.obj.bounds)
            .map(|(t, (lo, hi))| lo + t * (hi - lo))
            .collect()
    }

    fn out_of_time(&self) -> bool {
        self.deadline_s
            .map(|d| self.clock.now_s() - self.start_s >= d)
            .unwrap_or(false)
    }

    /// Evaluates a domain-space point and records it.
    fn eval_at(&mut self, x: &[f64]) -> f64 {
        let value = (self.obj.evaluate)(x);
        let wall = self.clock.now_s() - self.start_s;
        self.history.push(HistoryEntry {
            iteration: self.history.len(),
            value,
            wall_time_s: wall,
        });
        if value.is_finite() {
            self.points.push(self.normalize(x));
            self.values.push(value);
            let idx = self.values.len() - 1;
            if self.best_index.is_none_or(|b| value > self.values[b]) {
                self.best_index = Some(idx);
            }
        }
        value
    }

    fn best_value(&self) -> f64 {
        self.best_index
            .map(|i| self.values[i])
            .unwrap_or(f64::NEG_INFINITY)
    }
}

/// Maximizes the objective under an evaluation budget and an optional
/// wall-clock deadline (checked between evaluations, so the result always
/// contains at least the initial evaluation).
pub fn optimize<F: Fn(&[f64]) -> f64>(
    obj: &Objective<F>,
    settings: &OptSettings,
    clock: &dyn Clock,
) -> Result<OptResult, OptError> {
    if settings.budget == 0 {
        return Err(OptError::BadConfig("budget must be at least 1"));
    }
    if obj.bounds.is_empty() || obj.initial.len() != obj.bounds.len() {
        return Err(OptError::BadConfig("bounds and initial point disagree"));
    }
    if obj
        .bounds
        .iter()
        .any(|(lo, hi)| !lo.is_finite() || !hi.is_finite() || lo > hi)
    {
        return Err(OptError::BadConfig("bounds must be finite with lo <= hi"));
    }
    let batch = settings.batch.max(1);
    let dim = obj.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);

    let mut search = Search {
        obj,
        clock,
        start_s: clock.now_s(),
        deadline_s: settings.deadline_s,
        points: Vec::with_capacity(settings.budget),
        values: Vec::with_capacity(settings.budget),
        history: Vec::with_capacity(settings.budget),
        best_index: None,
    };

    // the handed-in starting point is always evaluated first
    let initial_value = search.eval_at(&obj.initial);
    let satisfied = |s: &Search<F>| settings.stop_when_satisfied && s.best_value() > 0.0;

    'outer: {
        if search.history.len() >= settings.budget || search.out_of_time() || satisfied(&search) {
            break 'outer;
        }
        match settings.method {
            Method::Random => {
                while search.history.len() < settings.budget {
                    let u: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
                    let x = search.denormalize(&u);
                    search.eval_at(&x);
                    if search.out_of_time() || satisfied(&search) {
                        break;
                    }
                }
            }
            Method::Bayesian => {
                // seeded low-discrepancy initial design
                let n_init = 5usize.max(dim).min(settings.budget - 1);
                let bases = primes(dim);
                let shifts: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
                for i in 0..n_init {
                    let u: Vec<f64> = (0..dim)
                        .map(|d| {
                            let h = halton(i, bases[d]) + shifts[d];
                            h - num::floor(h)
                        })
                        .collect();
                    let x = search.denormalize(&u);
                    search.eval_at(&x);
                    if search.history.len() >= settings.budget
                        || search.out_of_time()
                        || satisfied(&search)
                    {
                        break 'outer;
                    }
                }

                let hyper = GpHyperConfig::default();
                while search.history.len() < settings.budget {
                    let proposals = if search.points.len() >= 2 {
                        propose_by_ei(&search, &hyper, batch, &mut rng)
                    } else {
                        Vec::new()
                    };
                    let proposals = if proposals.is_empty() {
                        // surrogate unavailable: fall back to a random probe
                        alloc::vec![(0..dim).map(|_| rng.gen::<f64>()).collect::<Vec<f64>>()]
                    } else {
                        proposals
                    };
                    for u in proposals {
                        let x = search.denormalize(&u);
                        search.eval_at(&x);
                        if search.history.len() >= settings.budget
                            || search.out_of_time()
                            || satisfied(&search)
                        {
                            break 'outer;
                        }
                    }
                }
            }
        }
    }

    let best_point = match search.best_index {
        Some(i) => search.denormalize(&search.points[i].clone()),
        None => obj.initial.clone(),
    };
    Ok(OptResult {
        best_point,
        best_value: search.best_value(),
        initial_value,
        wall_time_total: clock.now_s() - search.start_s,
        history: search.history,
    })
}

/// Acquisition maximization: a seeded pool of global and incumbent-local
/// candidates, the best of which are refined by a short hill climb on EI.
fn propose_by_ei<F: Fn(&[f64]) -> f64>(
    search: &Search<F>,
    hyper: &GpHyperConfig,
    batch: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<f64>> {
    let dim = search.obj.dimension();
    let Ok(gp) = gp_fit(&search.points, &search.values, hyper) else {
        return Vec::new();
    };
    let best_value = search.best_value();
    let incumbent = search.points[search.best_index.expect("have points")].clone();

    let gauss = |rng: &mut ChaCha8Rng| {
        // Box-Muller
        let u1: f64 = rng.gen::<f64>().max(1e-12);
        let u2: f64 = rng.gen::<f64>();
        num::sqrt(-2.0 * num::ln(u1)) * num::cos(2.0 * core::f64::consts::PI * u2)
    };

    const POOL: usize = 256;
    let sigmas = [0.02, 0.05, 0.1, 0.2];
    let mut pool: Vec<Vec<f64>> = Vec::with_capacity(POOL);
    for i in 0..POOL {
        match i % 4 {
            0 => pool.push((0..dim).map(|_| rng.gen::<f64>()).collect()),
            1 => {
                let sigma = sigmas[(i / 4) % sigmas.len()];
                pool.push(
                    incumbent
                        .iter()
                        .map(|&c| (c + sigma * gauss(rng)).clamp(0.0, 1.0))
                        .collect(),
                );
            }
            // sparse moves: most coordinates of a high-dimensional fix are
            // already right, so perturb only a few at a time
            2 => {
                let touches = rng.gen_range(1..=(dim / 6).max(2));
                let mut cand = incumbent.clone();
                for _ in 0..touches {
                    let d = rng.gen_range(0..dim);
                    let sigma = sigmas[rng.gen_range(0..sigmas.len())];
                    cand[d] = (cand[d] + sigma * 3.0 * gauss(rng)).clamp(0.0, 1.0);
                }
                pool.push(cand);
            }
            _ => {
                let touches = rng.gen_range(1..=(dim / 6).max(2));
                let mut cand = incumbent.clone();
                for _ in 0..touches {
                    let d = rng.gen_range(0..dim);
                    cand[d] = rng.gen::<f64>();
                }
                pool.push(cand);
            }
        }
    }
    let mut scored: Vec<(f64, Vec<f64>)> = pool
        .into_iter()
        .map(|u| (expected_improvement(&gp, &u, best_value), u))
        .collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(core::cmp::Ordering::Equal));

    // local refinement of the strongest starts
    let starts = scored.len().min(4);
    let mut refined: Vec<(f64, Vec<f64>)> = Vec::with_capacity(starts);
    for (ei, u) in scored.iter().take(starts) {
        let mut cur = u.clone();
        let mut cur_ei = *ei;
        let mut step = 0.05;
        for _ in 0..15 {
            let cand: Vec<f64> = cur
                .iter()
                .map(|&c| (c + step * gauss(rng)).clamp(0.0, 1.0))
                .collect();
            let cand_ei = expected_improvement(&gp, &cand, best_value);
            if cand_ei > cur_ei {
                cur = cand;
                cur_ei = cand_ei;
            } else {
                step *= 0.7;
            }
        }
        refined.push((cur_ei, cur));
    }
    refined.extend(scored.into_iter().take(batch.max(1)));
    refined.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(core::cmp::Ordering::Equal));
    refined.dedup_by(|a, b| a.1 == b.1);
    refined.into_iter().take(batch).map(|(_, u)| u).collect()
}
