//! Duration-aware maximum-a-posteriori state decoding.

use alloc::vec;
use alloc::vec::Vec;

use super::model::{Demonstration, DurationScore, HsmmModel, StateSeq};
use super::LfdError;
use crate::num;

/// Decodes the most likely hidden state sequence for a demonstration.
///
/// Dynamic program over (component, segment end, segment duration) with
/// durations scored by the truncated Gaussian duration model (support
/// `[1, 3 * dur_mean]`) and transitions between distinct components scored by
/// the off-diagonal-renormalized transition row. A uniform prior covers the
/// first segment. If the duration cap makes the data unreachable the decoder
/// falls back to per-sample maximum-likelihood labels.
pub fn decode_states(model: &HsmmModel, demo: &Demonstration) -> Result<StateSeq, LfdError> {
    if num::abs(model.dt - demo.dt) > 1e-12 {
        return Err(LfdError::MixedSamplingPeriods);
    }
    let k = model.k();
    let t_len = demo.len();
    if k == 1 {
        return Ok(StateSeq {
            labels: vec![0; t_len],
        });
    }
    let gaussians = model.gaussians()?;

    // cumulative emission log-likelihoods per component
    let mut cum = vec![vec![0.0f64; t_len + 1]; k];
    for j in 0..k {
        for (t, x) in demo.states.iter().enumerate() {
            cum[j][t + 1] = cum[j][t] + gaussians[j].logpdf(x);
        }
    }
    let emit = |j: usize, start: usize, end_excl: usize| cum[j][end_excl] - cum[j][start];

    let durations: Vec<DurationScore> = (0..k)
        .map(|j| {
            let cap = (num::ceil(3.0 * model.dur_mean[j]) as usize).clamp(1, t_len);
            DurationScore::new(model.dur_mean[j], model.dur_var[j], cap)
        })
        .collect();

    // renormalized off-diagonal transition scores
    let trans_score: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let off: f64 = (0..k).filter(|&m| m != i).map(|m| model.trans[i][m]).sum();
            (0..k)
                .map(|j| {
                    if i == j || off < 1e-12 {
                        f64::NEG_INFINITY
                    } else {
                        num::ln((model.trans[i][j] / off).max(1e-300))
                    }
                })
                .collect()
        })
        .collect();

    let log_prior = -num::ln(k as f64);

    // delta[t][j]: best score of a segmentation of samples 0..=t whose last
    // segment has component j and ends exactly at t
    let mut delta = vec![vec![f64::NEG_INFINITY; k]; t_len];
    let mut back: Vec<Vec<Option<(usize, usize)>>> = vec![vec![None; k]; t_len];
    for t in 0..t_len {
        for j in 0..k {
            let s_max = durations[j].s_max().min(t + 1);
            for s in 1..=s_max {
                let seg_start = t + 1 - s;
                let base = emit(j, seg_start, t + 1) + durations[j].log_prob(s);
                let score = if seg_start == 0 {
                    base + log_prior
                } else {
                    let mut best_prev = f64::NEG_INFINITY;
                    let mut arg = None;
                    for i in 0..k {
                        if i == j {
                            continue;
                        }
                        let cand = delta[seg_start - 1][i] + trans_score[i][j];
                        if cand > best_prev {
                            best_prev = cand;
                            arg = Some(i);
                        }
                    }
                    match arg {
                        Some(_) if best_prev > f64::NEG_INFINITY => base + best_prev,
                        _ => f64::NEG_INFINITY,
                    }
                };
                if score > delta[t][j] {
                    delta[t][j] = score;
                    back[t][j] = Some((s, seg_start));
                }
            }
        }
    }

    let (mut best_j, mut best_score) = (0usize, f64::NEG_INFINITY);
    for j in 0..k {
        if delta[t_len - 1][j] > best_score {
            best_score = delta[t_len - 1][j];
            best_j = j;
        }
    }
    if best_score == f64::NEG_INFINITY {
        // unreachable under the duration cap: per-sample fallback
        let labels = demo
            .states
            .iter()
            .map(|x| {
                let mut best = 0usize;
                let mut best_ll = f64::NEG_INFINITY;
                for (j, g) in gaussians.iter().enumerate() {
                    let ll = g.logpdf(x);
                    if ll > best_ll {
                        best_ll = ll;
                        best = j;
                    }
                }
                best
            })
            .collect();
        return Ok(StateSeq { labels });
    }

    // trace back segments
    let mut labels = vec![0usize; t_len];
    let mut t = t_len - 1;
    let mut j = best_j;
    loop {
        let (s, seg_start) = back[t][j].expect("backpointer chain is complete");
        for label in labels.iter_mut().skip(seg_start).take(s) {
            *label = j;
        }
        if seg_start == 0 {
            break;
        }
        // find the predecessor that produced this segment's score
        let mut prev = None;
        let mut best_prev = f64::NEG_INFINITY;
        for i in 0..k {
            if i == j {
                continue;
            }
            let cand = delta[seg_start - 1][i] + trans_score[i][j];
            if cand > best_prev {
                best_prev = cand;
                prev = Some(i);
            }
        }
        j = prev.expect("interior segment has a predecessor");
        t = seg_start - 1;
    }
    Ok(StateSeq { labels })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eye(scale: f64) -> [[f64; 3]; 3] {
        [[scale, 0.0, 0.0], [0.0, scale, 0.0], [0.0, 0.0, scale]]
    }

    fn left_to_right(k3_means: [[f64; 3]; 3]) -> HsmmModel {
        HsmmModel {
            trans: vec![
                vec![0.8, 0.2, 0.0],
                vec![0.0, 0.8, 0.2],
                vec![0.0, 0.0, 1.0],
            ],
            means: k3_means.to_vec(),
            covs: vec![eye(0.05), eye(0.05), eye(0.05)],
            dur_mean: vec![6.0, 6.0, 6.0],
            dur_var: vec![2.0, 2.0, 2.0],
            dt: 0.5,
        }
    }

    #[test]
    fn single_component_labels_all_zero() {
        let model = HsmmModel {
            trans: vec![vec![1.0]],
            means: vec![[0.0; 3]],
            covs: vec![eye(0.1)],
            dur_mean: vec![3.0],
            dur_var: vec![1.0],
            dt: 0.5,
        };
        let demo = Demonstration::new(0.5, vec![[5.0, -2.0, 1.0]; 9]).unwrap();
        let seq = decode_states(&model, &demo).unwrap();
        assert_eq!(seq.labels, vec![0; 9]);
    }

    #[test]
    fn well_separated_components_give_contiguous_runs() {
        let means = [[0.0, 0.0, 0.0], [4.0, 1.0, 0.0], [8.0, 0.0, 0.0]];
        let model = left_to_right(means);
        let mut states = Vec::new();
        for c in &means {
            for _ in 0..6 {
                states.push(*c);
            }
        }
        let demo = Demonstration::new(0.5, states).unwrap();
        let seq = decode_states(&model, &demo).unwrap();
        let segs = seq.segments();
        assert_eq!(segs.len(), 3, "{segs:?}");
        assert_eq!(
            segs.iter().map(|(c, _, _)| *c).collect::<Vec<_>>(),
            vec![0, 1, 2]
        );
    }

    #[test]
    fn left_to_right_labels_non_decreasing() {
        let means = [[0.0, 0.0, 0.0], [4.0, 1.0, 0.0], [8.0, 0.0, 0.0]];
        let model = left_to_right(means);
        let mut states = Vec::new();
        for step in 0..18 {
            let x = step as f64 * 0.5;
            states.push([x, 0.0, 0.0]);
        }
        let demo = Demonstration::new(0.5, states).unwrap();
        let seq = decode_states(&model, &demo).unwrap();
        for w in seq.labels.windows(2) {
            assert!(w[1] >= w[0], "labels decreased: {:?}", seq.labels);
        }
    }

    #[test]
    fn dt_mismatch_rejected() {
        let model = left_to_right([[0.0; 3], [4.0, 0.0, 0.0], [8.0, 0.0, 0.0]]);
        let demo = Demonstration::new(0.25, vec![[0.0; 3]; 10]).unwrap();
        assert!(decode_states(&model, &demo).is_err());
    }
}
