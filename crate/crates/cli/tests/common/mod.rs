//! Shared helpers for the integration and acceptance suites.
#![allow(dead_code)] // each test target compiles its own copy

use std::path::{Path, PathBuf};
use std::process::Output;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use tlplan_core::stl::{Atom, BoundSource, CmpOp, Formula, Interval, LinExpr};
use tlplan_core::trace::Trace;

pub fn repo_data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// Runs the compiled `tlplan` binary.
pub fn tlplan(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_tlplan"))
        .args(args)
        .output()
        .expect("spawning tlplan")
}

pub fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(
        output.status.success(),
        "command failed: {}\n{}",
        output.status,
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("report is JSON")
}

pub const CHANNELS: [&str; 4] = ["a", "b", "c", "d"];

/// Random trace over up to four channels.
pub fn random_trace(rng: &mut ChaCha8Rng) -> Trace {
    let len = rng.gen_range(4..=50);
    let dt = [0.25, 0.5, 1.0][rng.gen_range(0..3)];
    let mut trace = Trace::new(dt, len).unwrap();
    for name in CHANNELS {
        let series = (0..len).map(|_| rng.gen_range(-3.0..3.0)).collect();
        trace.insert_channel(name, series).unwrap();
    }
    trace
}

fn random_interval(rng: &mut ChaCha8Rng, trace_span: f64) -> Interval {
    let lo = rng.gen_range(0.0..trace_span * 0.4);
    let hi = lo + rng.gen_range(0.0..trace_span * 0.6);
    Interval::new((lo * 4.0).round() / 4.0, (hi * 4.0).round() / 4.0).unwrap()
}

fn random_atom(rng: &mut ChaCha8Rng) -> Formula {
    if rng.gen_bool(0.3) {
        let x_lb = rng.gen_range(-3.0..1.0);
        let y_lb = rng.gen_range(-3.0..1.0);
        Formula::Atom(Atom::InBox {
            x_chan: "a".into(),
            y_chan: "b".into(),
            x_lb: BoundSource::Const(x_lb),
            x_ub: BoundSource::Const(x_lb + rng.gen_range(0.5..3.0)),
            y_lb: BoundSource::Const(y_lb),
            y_ub: BoundSource::Const(y_lb + rng.gen_range(0.5..3.0)),
        })
    } else {
        let n_terms = rng.gen_range(1..=2);
        let mut names: Vec<&str> = CHANNELS.to_vec();
        let mut terms = Vec::new();
        for _ in 0..n_terms {
            let idx = rng.gen_range(0..names.len());
            let name = names.remove(idx);
            let coef = [1.0, -1.0, 2.0, 0.5][rng.gen_range(0..4)];
            terms.push((coef, name.to_string()));
        }
        Formula::Atom(Atom::Cmp {
            expr: LinExpr::new(terms, 0.0).unwrap(),
            op: if rng.gen_bool(0.5) {
                CmpOp::Lt
            } else {
                CmpOp::Gt
            },
            bound: (rng.gen_range(-2.0..2.0_f64) * 4.0).round() / 4.0,
        })
    }
}

/// Random formula of bounded operator depth over the standard channels.
pub fn random_formula(rng: &mut ChaCha8Rng, depth: usize, trace_span: f64) -> Formula {
    if depth == 0 {
        return random_atom(rng);
    }
    match rng.gen_range(0..6) {
        0 => random_atom(rng),
        1 => Formula::not(random_formula(rng, depth - 1, trace_span)),
        2 => Formula::and(
            random_formula(rng, depth - 1, trace_span),
            random_formula(rng, depth - 1, trace_span),
        ),
        3 => Formula::or(
            random_formula(rng, depth - 1, trace_span),
            random_formula(rng, depth - 1, trace_span),
        ),
        4 => {
            let iv = random_interval(rng, trace_span);
            if rng.gen_bool(0.5) {
                Formula::eventually(iv, random_formula(rng, depth - 1, trace_span))
            } else {
                Formula::globally(iv, random_formula(rng, depth - 1, trace_span))
            }
        }
        _ => Formula::until(
            random_interval(rng, trace_span),
            random_formula(rng, depth - 1, trace_span),
            random_formula(rng, depth - 1, trace_span),
        ),
    }
}
