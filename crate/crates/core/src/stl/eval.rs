//! Boolean and classical quantitative semantics.
//!
//! Both evaluators walk the same indexed view of the formula and memoize
//! per-(node, time) results, so nested temporal operators stay polynomial in
//! the trace length. They are deliberately independent implementations: the
//! boolean evaluator never consults robustness values, which lets the two act
//! as cross-checking oracles.

use alloc::vec;
use alloc::vec::Vec;

use super::ast::{Atom, BoundSource, CmpOp, Formula, Interval};
use super::StlError;
use crate::num;
use crate::trace::Trace;

/// Inclusive index range produced by discretizing a temporal window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexWindow {
    pub lo: usize,
    pub hi: usize,
}

impl IndexWindow {
    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.lo..=self.hi
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false // constructed non-empty
    }
}

/// Discretizes `[t + iv.lo, t + iv.hi]` onto trace indices.
///
/// Endpoints round inward (`ceil` for the lower, `floor` for the upper, with
/// a small guard against float noise in the division) and the result is
/// clamped to the trace. An empty result is an error: it means the window
/// lies entirely outside the trace, which signals a spec/horizon mismatch.
pub fn interval_to_indices(
    iv: &Interval,
    t: usize,
    trace: &Trace,
) -> Result<IndexWindow, StlError> {
    if t >= trace.len() {
        return Err(StlError::TimeOutOfRange {
            t,
            len: trace.len(),
        });
    }
    const GUARD: f64 = 1e-9;
    let lo_steps = num::ceil(iv.lo() / trace.dt() - GUARD) as i64;
    let hi_steps = num::floor(iv.hi() / trace.dt() + GUARD) as i64;
    let lo = t as i64 + lo_steps;
    let hi = (t as i64 + hi_steps).min(trace.len() as i64 - 1);
    if lo > hi {
        return Err(StlError::EmptyWindow {
            t,
            lo,
            hi,
            len: trace.len(),
        });
    }
    Ok(IndexWindow {
        lo: lo as usize,
        hi: hi as usize,
    })
}

fn resolve_bound(b: &BoundSource, trace: &Trace, t: usize) -> Result<f64, StlError> {
    match b {
        BoundSource::Const(v) => Ok(*v),
        BoundSource::Channel(name) => trace.sample(name, t),
    }
}

/// Margin of an atomic predicate at index `t`.
///
/// Comparisons return the signed slack of the inequality; the box predicate
/// returns the smallest signed margin to the four faces (positive inside).
pub fn eval_atom(a: &Atom, trace: &Trace, t: usize) -> Result<f64, StlError> {
    if t >= trace.len() {
        return Err(StlError::TimeOutOfRange {
            t,
            len: trace.len(),
        });
    }
    match a {
        Atom::Cmp { expr, op, bound } => {
            let mut value = expr.constant;
            for (coef, name) in &expr.terms {
                value += coef * trace.sample(name, t)?;
            }
            Ok(match op {
                CmpOp::Lt => bound - value,
                CmpOp::Gt => value - bound,
            })
        }
        Atom::InBox {
            x_chan,
            y_chan,
            x_lb,
            x_ub,
            y_lb,
            y_ub,
        } => {
            let x = trace.sample(x_chan, t)?;
            let y = trace.sample(y_chan, t)?;
            let xlb = resolve_bound(x_lb, trace, t)?;
            let xub = resolve_bound(x_ub, trace, t)?;
            let ylb = resolve_bound(y_lb, trace, t)?;
            let yub = resolve_bound(y_ub, trace, t)?;
            Ok((x - xlb).min(xub - x).min(y - ylb).min(yub - y))
        }
    }
}

/// Indexed formula view shared by the evaluators in this module and the
/// smooth semantics.
pub(super) struct Indexed<'f> {
    pub nodes: Vec<&'f Formula>,
    pub root: usize,
}

impl<'f> Indexed<'f> {
    pub fn new(f: &'f Formula) -> Self {
        let mut nodes = Vec::new();
        fn walk<'f>(f: &'f Formula, nodes: &mut Vec<&'f Formula>) -> usize {
            let id = nodes.len();
            nodes.push(f);
            match f {
                Formula::Atom(_) => {}
                Formula::Not(c) | Formula::Eventually(_, c) | Formula::Globally(_, c) => {
                    walk(c, nodes);
                }
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(_, a, b) => {
                    walk(a, nodes);
                    walk(b, nodes);
                }
            }
            id
        }
        let root = walk(f, &mut nodes);
        Self { nodes, root }
    }

    /// Child ids follow from pre-order placement: the first child is `id + 1`
    /// and the second starts after the first child's subtree.
    pub fn children(&self, id: usize) -> (usize, usize) {
        let first = id + 1;
        (first, first + subtree_size(self.nodes[first]))
    }
}

fn subtree_size(f: &Formula) -> usize {
    match f {
        Formula::Atom(_) => 1,
        Formula::Not(c) | Formula::Eventually(_, c) | Formula::Globally(_, c) => {
            1 + subtree_size(c)
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(_, a, b) => {
            1 + subtree_size(a) + subtree_size(b)
        }
    }
}

struct RobustnessEval<'f, 't> {
    ix: Indexed<'f>,
    trace: &'t Trace,
    memo: Vec<Vec<Option<f64>>>,
}

impl<'f, 't> RobustnessEval<'f, 't> {
    fn new(f: &'f Formula, trace: &'t Trace) -> Self {
        let ix = Indexed::new(f);
        let memo = vec![vec![None; trace.len()]; ix.nodes.len()];
        Self { ix, trace, memo }
    }

    fn eval(&mut self, id: usize, t: usize) -> Result<f64, StlError> {
        if let Some(v) = self.memo[id][t] {
            return Ok(v);
        }
        let v = match self.ix.nodes[id] {
            Formula::Atom(a) => eval_atom(a, self.trace, t)?,
            Formula::Not(_) => -self.eval(id + 1, t)?,
            Formula::And(..) => {
                let (a, b) = self.ix.children(id);
                self.eval(a, t)?.min(self.eval(b, t)?)
            }
            Formula::Or(..) => {
                let (a, b) = self.ix.children(id);
                self.eval(a, t)?.max(self.eval(b, t)?)
            }
            Formula::Eventually(iv, _) => {
                let w = interval_to_indices(iv, t, self.trace)?;
                let mut best = f64::NEG_INFINITY;
                for k in w.iter() {
                    best = best.max(self.eval(id + 1, k)?);
                }
                best
            }
            Formula::Globally(iv, _) => {
                let w = interval_to_indices(iv, t, self.trace)?;
                let mut worst = f64::INFINITY;
                for k in w.iter() {
                    worst = worst.min(self.eval(id + 1, k)?);
                }
                worst
            }
            Formula::Until(iv, ..) => {
                let (lhs, rhs) = self.ix.children(id);
                let w = interval_to_indices(iv, t, self.trace)?;
                // prefix minimum of the left operand over [t, k-1], extended
                // incrementally as the witness k advances
                let mut prefix_min = f64::INFINITY;
                for j in t..w.lo {
                    prefix_min = prefix_min.min(self.eval(lhs, j)?);
                }
                let mut best = f64::NEG_INFINITY;
                for k in w.iter() {
                    let witness = self.eval(rhs, k)?.min(prefix_min);
                    best = best.max(witness);
                    prefix_min = prefix_min.min(self.eval(lhs, k)?);
                }
                best
            }
        };
        self.memo[id][t] = Some(v);
        Ok(v)
    }
}

/// Classical (min/max) robustness degree of `f` on `trace` at index `t`.
pub fn robustness(f: &Formula, trace: &Trace, t: usize) -> Result<f64, StlError> {
    let mut ev = RobustnessEval::new(f, trace);
    let root = ev.ix.root;
    ev.eval(root, t)
}

struct BoolEval<'f, 't> {
    ix: Indexed<'f>,
    trace: &'t Trace,
    memo: Vec<Vec<Option<bool>>>,
}

impl<'f, 't> BoolEval<'f, 't> {
    fn new(f: &'f Formula, trace: &'t Trace) -> Self {
        let ix = Indexed::new(f);
        let memo = vec![vec![None; trace.len()]; ix.nodes.len()];
        Self { ix, trace, memo }
    }

    fn eval(&mut self, id: usize, t: usize) -> Result<bool, StlError> {
        if let Some(v) = self.memo[id][t] {
            return Ok(v);
        }
        // no short-circuiting: error behavior must match the quantitative
        // evaluator exactly
        let v = match self.ix.nodes[id] {
            Formula::Atom(a) => eval_atom(a, self.trace, t)? > 0.0,
            Formula::Not(_) => !self.eval(id + 1, t)?,
            Formula::And(..) => {
                let (a, b) = self.ix.children(id);
                let va = self.eval(a, t)?;
                let vb = self.eval(b, t)?;
                va && vb
            }
            Formula::Or(..) => {
                let (a, b) = self.ix.children(id);
                let va = self.eval(a, t)?;
                let vb = self.eval(b, t)?;
                va || vb
            }
            Formula::Eventually(iv, _) => {
                let w = interval_to_indices(iv, t, self.trace)?;
                let mut any = false;
                for k in w.iter() {
                    any |= self.eval(id + 1, k)?;
                }
                any
            }
            Formula::Globally(iv, _) => {
                let w = interval_to_indices(iv, t, self.trace)?;
                let mut all = true;
                for k in w.iter() {
                    all &= self.eval(id + 1, k)?;
                }
                all
            }
            Formula::Until(iv, ..) => {
                let (lhs, rhs) = self.ix.children(id);
                let w = interval_to_indices(iv, t, self.trace)?;
                let mut prefix_holds = true;
                for j in t..w.lo {
                    prefix_holds &= self.eval(lhs, j)?;
                }
                let mut sat = false;
                for k in w.iter() {
                    sat |= self.eval(rhs, k)? && prefix_holds;
                    prefix_holds &= self.eval(lhs, k)?;
                }
                sat
            }
        };
        self.memo[id][t] = Some(v);
        Ok(v)
    }
}

/// Boolean satisfaction of `f` on `trace` at index `t`.
pub fn eval_bool(f: &Formula, trace: &Trace, t: usize) -> Result<bool, StlError> {
    let mut ev = BoolEval::new(f, trace);
    let root = ev.ix.root;
    ev.eval(root, t)
}
