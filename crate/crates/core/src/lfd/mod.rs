//! Learning from demonstrations: fits a hidden semi-Markov motion model to
//! recorded trajectories and exposes the optimizable parameter subset.

mod decode;
mod em;
mod model;
mod theta;

pub use decode::decode_states;
pub use em::{fit_hsmm, fit_hsmm_with_report, FitReport};
pub use model::{component_sequence, Demonstration, Gaussian3, HsmmModel, StateSeq};
pub use theta::{apply_theta, extract_theta, ParamVector, ThetaBounds, ThetaLayout};

/// Errors from model fitting and parameter handling.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LfdError {
    #[error("demonstration too short: need at least {need} samples, got {got}")]
    DemoTooShort { need: usize, got: usize },
    #[error("demonstrations disagree on sampling period")]
    MixedSamplingPeriods,
    #[error("component count {k} exceeds shortest demonstration length {shortest}")]
    TooManyComponents { k: usize, shortest: usize },
    #[error("too few samples: {got} for {k} components (need at least 3 per component)")]
    TooFewSamples { got: usize, k: usize },
    #[error("covariance of component {component} is singular even after regularization")]
    SingularCovariance { component: usize },
    #[error(
        "parameter vector layout does not match model (expected {expected} components, got {got})"
    )]
    LayoutMismatch { expected: usize, got: usize },
    #[error("invalid model: {0}")]
    InvalidModel(&'static str),
}
