//! Trajectory planning under signal temporal logic constraints.
//!
//! The crate learns a hidden semi-Markov motion model from recorded
//! demonstrations, reproduces dynamically feasible unicycle trajectories from
//! it with an iterative LQR tracker, expresses environment constraints
//! (obstacles, road rules, traffic lights, safety distances) as STL formulas,
//! and searches the model's parameter space for trajectories that maximize a
//! smooth robustness degree — either once over the full horizon or cycle by
//! cycle under a wall-clock budget.
//!
//! The crate is `no_std`-compatible (`alloc` required); the default `std`
//! feature enables the wall-clock [`time::WallClock`]. All transcendental
//! math goes through `libm` so results are identical across feature sets
//! and platforms.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]
// negated comparisons like `!(x > 0.0)` are used on purpose: they reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// index loops here usually touch several parallel arrays at once
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod constraints;
pub mod lfd;
pub mod num;
pub mod optimize;
pub mod plansim;
pub mod reproduce;
pub mod stl;
pub mod time;
pub mod trace;

pub use stl::{Atom, Formula, Interval, LinExpr, RobustnessConfig, Semantics};
pub use trace::Trace;
