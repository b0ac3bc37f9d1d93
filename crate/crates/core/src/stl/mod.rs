//! Signal temporal logic: abstract syntax, concrete syntax, and boolean,
//! classical quantitative, and smooth quantitative semantics over
//! discrete-time multi-channel traces.

mod ast;
mod eval;
mod fmt;
mod parse;
mod smooth;

pub use ast::{Atom, BoundSource, CmpOp, Formula, Interval, LinExpr};
pub use eval::{eval_atom, eval_bool, interval_to_indices, robustness, IndexWindow};
pub use fmt::format_formula;
pub use parse::parse_formula;
pub use smooth::{smooth_and, smooth_or, smooth_robustness};

use alloc::string::String;

/// Errors produced by parsing and evaluation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StlError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("malformed interval: {0}")]
    BadInterval(&'static str),
    #[error("empty evaluation window at t={t} (window [{lo},{hi}] outside trace of length {len})")]
    EmptyWindow {
        t: usize,
        lo: i64,
        hi: i64,
        len: usize,
    },
    #[error("unknown channel `{0}`")]
    UnknownChannel(String),
    #[error("invalid trace: {0}")]
    BadTrace(&'static str),
    #[error("smoothing parameter nu must be positive")]
    BadNu,
    #[error("time index {t} outside trace of length {len}")]
    TimeOutOfRange { t: usize, len: usize },
}

/// Which quantitative semantics to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Semantics {
    Classical,
    Smooth,
}

/// Configuration for quantitative evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustnessConfig {
    pub nu: f64,
    pub semantics: Semantics,
}

impl RobustnessConfig {
    pub fn new(nu: f64, semantics: Semantics) -> Result<Self, StlError> {
        if !(nu > 0.0) {
            return Err(StlError::BadNu);
        }
        Ok(Self { nu, semantics })
    }
}
