//! Budgeted, seeded, deadline-aware maximization of a black-box objective
//! over a bounded box: Gaussian-process surrogate with expected improvement,
//! plus a seeded random-search fallback.

mod gp;
mod search;

pub use gp::{expected_improvement, gp_fit, GpHyperConfig, GpSurrogate};
pub use search::{optimize, HistoryEntry, Method, Objective, OptResult, OptSettings};

/// Errors from surrogate fitting and the search loop.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OptError {
    #[error("surrogate needs at least two observations, got {0}")]
    TooFewPoints(usize),
    #[error("kernel matrix is not positive definite even after jitter escalation")]
    CholeskyFailed,
    #[error("invalid optimizer configuration: {0}")]
    BadConfig(&'static str),
}
