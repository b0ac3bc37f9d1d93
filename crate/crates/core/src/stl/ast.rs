//! Formula syntax trees.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::StlError;

/// Closed time interval `[lo, hi]` in seconds, attached to temporal operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, StlError> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(StlError::BadInterval("bounds must be finite"));
        }
        if lo < 0.0 {
            return Err(StlError::BadInterval("lower bound must be >= 0"));
        }
        if lo > hi {
            return Err(StlError::BadInterval("lower bound exceeds upper bound"));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }
}

/// Affine expression over named trace channels.
#[derive(Debug, Clone, PartialEq)]
pub struct LinExpr {
    /// `(coefficient, channel)` pairs; channel names are unique per expression.
    pub terms: Vec<(f64, String)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn new(terms: Vec<(f64, String)>, constant: f64) -> Result<Self, StlError> {
        let mut seen = BTreeSet::new();
        for (_, name) in &terms {
            if name.is_empty() {
                return Err(StlError::BadTrace("empty channel name in expression"));
            }
            if !seen.insert(name.as_str()) {
                return Err(StlError::BadTrace("duplicate channel in expression"));
            }
        }
        Ok(Self { terms, constant })
    }

    /// Single channel with coefficient 1 and no constant.
    pub fn channel(name: impl Into<String>) -> Self {
        Self {
            terms: alloc::vec![(1.0, name.into())],
            constant: 0.0,
        }
    }

    /// `a - b` between two channels.
    pub fn difference(a: impl Into<String>, b: impl Into<String>) -> Self {
        Self {
            terms: alloc::vec![(1.0, a.into()), (-1.0, b.into())],
            constant: 0.0,
        }
    }
}

/// Comparison direction of an atomic predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Gt,
}

/// A box-predicate bound: either a constant or read from a channel at the
/// evaluation index (the latter carries per-timestep obstacle bounds).
#[derive(Debug, Clone, PartialEq)]
pub enum BoundSource {
    Const(f64),
    Channel(String),
}

/// Atomic predicates: affine comparisons and the 2-D box membership test.
#[derive(Debug, Clone, PartialEq)]
pub enum Atom {
    Cmp {
        expr: LinExpr,
        op: CmpOp,
        bound: f64,
    },
    InBox {
        x_chan: String,
        y_chan: String,
        x_lb: BoundSource,
        x_ub: BoundSource,
        y_lb: BoundSource,
        y_ub: BoundSource,
    },
}

/// STL formulas over discrete-time traces.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Eventually(Interval, Box<Formula>),
    Globally(Interval, Box<Formula>),
    Until(Interval, Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(a: Atom) -> Self {
        Formula::Atom(a)
    }

    #[allow(clippy::should_implement_trait)] // constructor, not an operator impl
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn eventually(iv: Interval, f: Formula) -> Self {
        Formula::Eventually(iv, Box::new(f))
    }

    pub fn globally(iv: Interval, f: Formula) -> Self {
        Formula::Globally(iv, Box::new(f))
    }

    pub fn until(iv: Interval, lhs: Formula, rhs: Formula) -> Self {
        Formula::Until(iv, Box::new(lhs), Box::new(rhs))
    }

    /// Left-folded conjunction; `None` when the iterator is empty.
    pub fn conjunction(parts: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        let mut it = parts.into_iter();
        let first = it.next()?;
        Some(it.fold(first, Formula::and))
    }

    /// Names of all channels the formula reads.
    pub fn channels(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_channels(&mut out);
        out
    }

    fn collect_channels(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(Atom::Cmp { expr, .. }) => {
                for (_, name) in &expr.terms {
                    out.insert(name.clone());
                }
            }
            Formula::Atom(Atom::InBox {
                x_chan,
                y_chan,
                x_lb,
                x_ub,
                y_lb,
                y_ub,
            }) => {
                out.insert(x_chan.clone());
                out.insert(y_chan.clone());
                for b in [x_lb, x_ub, y_lb, y_ub] {
                    if let BoundSource::Channel(name) = b {
                        out.insert(name.clone());
                    }
                }
            }
            Formula::Not(f) | Formula::Eventually(_, f) | Formula::Globally(_, f) => {
                f.collect_channels(out)
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(_, a, b) => {
                a.collect_channels(out);
                b.collect_channels(out);
            }
        }
    }
}
