//! Smooth quantitative semantics.
//!
//! Conjunctions of operand values `r_1..r_m` aggregate to a weighted mean
//! whose weights concentrate exponentially (rate `nu`) on the worst operand:
//!
//! - `r_min < 0`:  `sum_i r_min e^{rt_i} e^{nu rt_i} / sum_i e^{nu rt_i}`
//! - `r_min > 0`:  `sum_i r_i e^{-nu rt_i} / sum_i e^{-nu rt_i}`
//! - `r_min = 0`:  `0`
//!
//! with `rt_i = (r_i - r_min) / r_min`. The aggregate keeps the sign of
//! `r_min`, stays within `[r_min, max_i r_i]`, and tends to `min_i r_i` as
//! `nu` grows. Disjunction is the De Morgan dual, and every other operator
//! reduces to these two by pushing negations to the atoms (negation normal
//! form); negation distributes over `Until` by negating its aggregate.
//!
//! In both cases the relevant exponent is maximal (exactly 0) at the minimum
//! operand, i.e. the expression is already in max-shifted form, so the
//! weights never overflow and the denominator is at least 1.

use alloc::vec;
use alloc::vec::Vec;

use super::ast::Formula;
use super::eval::{eval_atom, interval_to_indices, Indexed};
use super::StlError;
use crate::num;
use crate::trace::Trace;

/// Smooth conjunction of operand robustness values.
pub fn smooth_and(values: &[f64], nu: f64) -> Result<f64, StlError> {
    if !(nu > 0.0) {
        return Err(StlError::BadNu);
    }
    debug_assert!(!values.is_empty());
    let r_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if r_min == 0.0 {
        return Ok(0.0);
    }
    let mut numer = 0.0;
    let mut denom = 0.0;
    if r_min < 0.0 {
        for &r in values {
            let rt = (r - r_min) / r_min; // <= 0
            let w = num::exp(nu * rt);
            numer += r_min * num::exp(rt) * w;
            denom += w;
        }
    } else {
        for &r in values {
            let rt = (r - r_min) / r_min; // >= 0
            let w = num::exp(-nu * rt);
            numer += r * w;
            denom += w;
        }
    }
    Ok(numer / denom)
}

/// Smooth disjunction: De Morgan dual of [`smooth_and`].
pub fn smooth_or(values: &[f64], nu: f64) -> Result<f64, StlError> {
    let negated: Vec<f64> = values.iter().map(|v| -v).collect();
    Ok(-smooth_and(&negated, nu)?)
}

struct SmoothEval<'f, 't> {
    ix: Indexed<'f>,
    trace: &'t Trace,
    nu: f64,
    // memo per (node, t, polarity); polarity 1 = as written, 0 = negated
    memo: Vec<[Vec<Option<f64>>; 2]>,
}

/// An operand of a flattened conjunction/disjunction: node id plus the
/// polarity it is evaluated under.
type Operand = (usize, bool);

impl<'f, 't> SmoothEval<'f, 't> {
    fn new(f: &'f Formula, trace: &'t Trace, nu: f64) -> Self {
        let ix = Indexed::new(f);
        let memo = (0..ix.nodes.len())
            .map(|_| [vec![None; trace.len()], vec![None; trace.len()]])
            .collect();
        Self {
            ix,
            trace,
            nu,
            memo,
        }
    }

    /// Collects the maximal conjunction rooted at `id` under `positive`
    /// polarity: `And` chains as written, `Or` chains under negation, with
    /// negations pushed through. Operands are the first non-conjunctive
    /// descendants.
    fn gather_conjuncts(&self, id: usize, positive: bool, out: &mut Vec<Operand>) {
        match self.ix.nodes[id] {
            Formula::Not(_) => self.gather_conjuncts(id + 1, !positive, out),
            Formula::And(..) if positive => {
                let (a, b) = self.ix.children(id);
                self.gather_conjuncts(a, true, out);
                self.gather_conjuncts(b, true, out);
            }
            Formula::Or(..) if !positive => {
                let (a, b) = self.ix.children(id);
                self.gather_conjuncts(a, false, out);
                self.gather_conjuncts(b, false, out);
            }
            _ => out.push((id, positive)),
        }
    }

    /// Dual of [`Self::gather_conjuncts`] for disjunction chains.
    fn gather_disjuncts(&self, id: usize, positive: bool, out: &mut Vec<Operand>) {
        match self.ix.nodes[id] {
            Formula::Not(_) => self.gather_disjuncts(id + 1, !positive, out),
            Formula::Or(..) if positive => {
                let (a, b) = self.ix.children(id);
                self.gather_disjuncts(a, true, out);
                self.gather_disjuncts(b, true, out);
            }
            Formula::And(..) if !positive => {
                let (a, b) = self.ix.children(id);
                self.gather_disjuncts(a, false, out);
                self.gather_disjuncts(b, false, out);
            }
            _ => out.push((id, positive)),
        }
    }

    fn eval_operands(&mut self, ops: &[Operand], t: usize) -> Result<Vec<f64>, StlError> {
        ops.iter().map(|&(id, pos)| self.eval(id, t, pos)).collect()
    }

    fn eval(&mut self, id: usize, t: usize, positive: bool) -> Result<f64, StlError> {
        let slot = positive as usize;
        if let Some(v) = self.memo[id][slot][t] {
            return Ok(v);
        }
        let v = match self.ix.nodes[id] {
            Formula::Atom(a) => {
                let m = eval_atom(a, self.trace, t)?;
                if positive {
                    m
                } else {
                    -m
                }
            }
            Formula::Not(_) => self.eval(id + 1, t, !positive)?,
            Formula::And(..) | Formula::Or(..) => {
                let conjunctive = matches!(self.ix.nodes[id], Formula::And(..)) == positive;
                let mut ops = Vec::new();
                if conjunctive {
                    self.gather_conjuncts(id, positive, &mut ops);
                    let vals = self.eval_operands(&ops, t)?;
                    smooth_and(&vals, self.nu)?
                } else {
                    self.gather_disjuncts(id, positive, &mut ops);
                    let vals = self.eval_operands(&ops, t)?;
                    smooth_or(&vals, self.nu)?
                }
            }
            Formula::Globally(iv, _) | Formula::Eventually(iv, _) => {
                let w = interval_to_indices(iv, t, self.trace)?;
                let conjunctive = matches!(self.ix.nodes[id], Formula::Globally(..)) == positive;
                let mut vals = Vec::with_capacity(w.len());
                for k in w.iter() {
                    vals.push(self.eval(id + 1, k, positive)?);
                }
                if conjunctive {
                    smooth_and(&vals, self.nu)?
                } else {
                    smooth_or(&vals, self.nu)?
                }
            }
            Formula::Until(iv, ..) => {
                // classical structure with min/max replaced by the smooth
                // aggregators; a negated Until negates its aggregate
                let (lhs, rhs) = self.ix.children(id);
                let w = interval_to_indices(iv, t, self.trace)?;
                let mut witnesses = Vec::with_capacity(w.len());
                let mut prefix: Vec<f64> = Vec::new();
                for j in t..w.lo {
                    prefix.push(self.eval(lhs, j, true)?);
                }
                for k in w.iter() {
                    let mut operands = Vec::with_capacity(prefix.len() + 1);
                    operands.push(self.eval(rhs, k, true)?);
                    operands.extend_from_slice(&prefix);
                    witnesses.push(smooth_and(&operands, self.nu)?);
                    prefix.push(self.eval(lhs, k, true)?);
                }
                let v = smooth_or(&witnesses, self.nu)?;
                if positive {
                    v
                } else {
                    -v
                }
            }
        };
        self.memo[id][slot][t] = Some(v);
        Ok(v)
    }
}

/// Smooth robustness degree of `f` on `trace` at index `t`.
pub fn smooth_robustness(f: &Formula, trace: &Trace, t: usize, nu: f64) -> Result<f64, StlError> {
    if !(nu > 0.0) {
        return Err(StlError::BadNu);
    }
    let mut ev = SmoothEval::new(f, trace, nu);
    let root = ev.ix.root;
    ev.eval(root, t, true)
}

#[cfg(test)]
mod tests {
    use super::super::{eval_bool, parse_formula, robustness};
    use super::*;
    use alloc::string::String;
    use rand::Rng;
    use rand::SeedableRng;

    /// Literal transcription of the three-case aggregation, for comparison.
    fn smooth_and_naive(values: &[f64], nu: f64) -> f64 {
        let r_min = values.iter().copied().fold(f64::INFINITY, f64::min);
        if r_min == 0.0 {
            return 0.0;
        }
        let rt: Vec<f64> = values.iter().map(|r| (r - r_min) / r_min).collect();
        if r_min < 0.0 {
            let num: f64 = rt
                .iter()
                .map(|&x| r_min * num::exp(x) * num::exp(nu * x))
                .sum();
            let den: f64 = rt.iter().map(|&x| num::exp(nu * x)).sum();
            num / den
        } else {
            let num: f64 = values
                .iter()
                .zip(&rt)
                .map(|(&r, &x)| r * num::exp(-nu * x))
                .sum();
            let den: f64 = rt.iter().map(|&x| num::exp(-nu * x)).sum();
            num / den
        }
    }

    #[test]
    fn identity_on_equal_operands() {
        for nu in [0.5, 5.0, 50.0] {
            assert_eq!(smooth_and(&[2.0, 2.0, 2.0], nu).unwrap(), 2.0);
            assert_eq!(smooth_and(&[-3.0, -3.0], nu).unwrap(), -3.0);
        }
    }

    #[test]
    fn zero_min_pins_to_zero() {
        assert_eq!(smooth_and(&[0.0, 1.0, 5.0], 5.0).unwrap(), 0.0);
        assert_eq!(smooth_and(&[0.0], 0.5).unwrap(), 0.0);
    }

    #[test]
    fn spot_value_positive_case() {
        // (1 + 2e^-5 + 3e^-10) / (1 + e^-5 + e^-10)
        let v = smooth_and(&[1.0, 2.0, 3.0], 5.0).unwrap();
        assert!((v - 1.00678).abs() < 1e-4, "got {v}");
    }

    #[test]
    fn spot_value_negative_case() {
        let v = smooth_and(&[-1.0, 1.0], 5.0).unwrap();
        assert!((v - (-0.99996)).abs() < 1e-4, "got {v}");
    }

    #[test]
    fn matches_naive_evaluation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let m = rng.gen_range(1..8);
            let vals: Vec<f64> = (0..m).map(|_| rng.gen_range(-10.0..10.0)).collect();
            for nu in [0.5, 5.0, 50.0] {
                let a = smooth_and(&vals, nu).unwrap();
                let b = smooth_and_naive(&vals, nu);
                let scale = a.abs().max(b.abs()).max(1.0);
                assert!((a - b).abs() / scale < 1e-9, "{vals:?} nu={nu}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn sign_and_bounds_properties() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..5000 {
            let m = rng.gen_range(1..10);
            let vals: Vec<f64> = (0..m).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let r_min = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let r_max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for nu in [0.5, 5.0, 50.0] {
                let v = smooth_and(&vals, nu).unwrap();
                if r_min != 0.0 {
                    assert_eq!(v > 0.0, r_min > 0.0, "{vals:?} nu={nu} -> {v}");
                }
                assert!(
                    v >= r_min - 1e-12 && v <= r_max + 1e-12,
                    "{vals:?} nu={nu} -> {v} outside [{r_min},{r_max}]"
                );
            }
        }
    }

    #[test]
    fn large_nu_tends_to_min() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..2000 {
            let m = rng.gen_range(1..8);
            // positive minimum with all other operands separated by at least
            // 30% relative gap: the soft-min error decays like e^{-nu*gap}
            let r_min = rng.gen_range(0.1..5.0);
            let mut vals: Vec<f64> = (0..m)
                .map(|_| r_min * (1.0 + rng.gen_range(0.3..3.0)))
                .collect();
            vals[0] = r_min;
            let v = smooth_and(&vals, 50.0).unwrap();
            assert!((v - r_min).abs() < 1e-3, "{vals:?} -> {v} vs {r_min}");
        }
    }

    #[test]
    fn disjunction_dual() {
        let v = smooth_or(&[-1.0, -2.0, -3.0], 5.0).unwrap();
        let w = smooth_and(&[1.0, 2.0, 3.0], 5.0).unwrap();
        assert_eq!(v, -w);
    }

    #[test]
    fn rejects_bad_nu() {
        assert!(smooth_and(&[1.0], 0.0).is_err());
        assert!(smooth_and(&[1.0], -1.0).is_err());
        let tr = {
            let mut tr = Trace::new(1.0, 3).unwrap();
            tr.insert_channel(String::from("a"), alloc::vec![1.0, 2.0, 3.0])
                .unwrap();
            tr
        };
        let f = parse_formula("G[0,2] a > 0").unwrap();
        assert!(smooth_robustness(&f, &tr, 0, 0.0).is_err());
    }

    #[test]
    fn formula_sign_agrees_with_boolean_semantics() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        let shapes = [
            "G[0,3] a > 0",
            "F[0,3] a > 0",
            "G[0,2](a > 0 & b < 1)",
            "!(F[0,2]!(a > 0))",
            "a > 0 U[0,3] b > 0",
            "(a > 0 | b > 0) U[1,3] (a > 0 & b > 0)",
        ];
        for _ in 0..300 {
            let n = 6;
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let mut tr = Trace::new(1.0, n).unwrap();
            tr.insert_channel(String::from("a"), a).unwrap();
            tr.insert_channel(String::from("b"), b).unwrap();
            for shape in &shapes {
                let f = parse_formula(shape).unwrap();
                let smooth = smooth_robustness(&f, &tr, 0, 5.0).unwrap();
                let classical = robustness(&f, &tr, 0).unwrap();
                if classical.abs() > 1e-9 && smooth.abs() > 1e-12 {
                    assert_eq!(
                        smooth > 0.0,
                        eval_bool(&f, &tr, 0).unwrap(),
                        "{shape}: smooth {smooth} vs classical {classical}"
                    );
                }
            }
        }
    }

    #[test]
    fn globally_aggregates_whole_window() {
        // conjunction over the window must match aggregating the margins directly
        let mut tr = Trace::new(1.0, 4).unwrap();
        tr.insert_channel(String::from("a"), alloc::vec![1.0, 2.0, 3.0, 4.0])
            .unwrap();
        let f = parse_formula("G[0,3] a > 0").unwrap();
        let v = smooth_robustness(&f, &tr, 0, 5.0).unwrap();
        let direct = smooth_and(&[1.0, 2.0, 3.0, 4.0], 5.0).unwrap();
        assert_eq!(v, direct);
    }

    #[test]
    fn nested_and_flattens() {
        // (a & b) & c aggregates as one 3-way conjunction
        let mut tr = Trace::new(1.0, 1).unwrap();
        tr.insert_channel(String::from("a"), alloc::vec![1.0])
            .unwrap();
        tr.insert_channel(String::from("b"), alloc::vec![2.0])
            .unwrap();
        tr.insert_channel(String::from("c"), alloc::vec![3.0])
            .unwrap();
        let f = parse_formula("a > 0 & b > 0 & c > 0").unwrap();
        let v = smooth_robustness(&f, &tr, 0, 5.0).unwrap();
        let direct = smooth_and(&[1.0, 2.0, 3.0], 5.0).unwrap();
        assert_eq!(v, direct);
    }
}
