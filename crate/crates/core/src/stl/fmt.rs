//! Canonical text rendering of formulas.
//!
//! `parse_formula(format_formula(f))` reproduces `f` structurally for every
//! formula the grammar can express. Expressions carrying a nonzero constant
//! (only constructible programmatically) are normalized by folding the
//! constant into the comparison bound, which leaves robustness unchanged.

use alloc::string::String;
use alloc::string::ToString;
use core::fmt::{self, Write};

use super::ast::{Atom, BoundSource, CmpOp, Formula, Interval, LinExpr};

/// Renders a formula as parseable text.
pub fn format_formula(f: &Formula) -> String {
    f.to_string()
}

// Precedence levels: Until 0, Or 1, And 2, unary 3, atom 4.
fn level(f: &Formula) -> u8 {
    match f {
        Formula::Until(..) => 0,
        Formula::Or(..) => 1,
        Formula::And(..) => 2,
        Formula::Not(..) | Formula::Eventually(..) | Formula::Globally(..) => 3,
        Formula::Atom(..) => 4,
    }
}

fn write_interval(out: &mut fmt::Formatter<'_>, iv: &Interval) -> fmt::Result {
    write!(out, "[{},{}]", iv.lo(), iv.hi())
}

fn write_expr(out: &mut fmt::Formatter<'_>, e: &LinExpr) -> fmt::Result {
    for (i, (coef, name)) in e.terms.iter().enumerate() {
        let mag = coef.abs();
        if i == 0 {
            if *coef < 0.0 {
                out.write_char('-')?;
            }
        } else if *coef < 0.0 {
            out.write_str(" - ")?;
        } else {
            out.write_str(" + ")?;
        }
        if mag == 1.0 {
            out.write_str(name)?;
        } else {
            write!(out, "{mag}*{name}")?;
        }
    }
    Ok(())
}

fn write_bound(out: &mut fmt::Formatter<'_>, b: &BoundSource) -> fmt::Result {
    match b {
        BoundSource::Const(v) => write!(out, "{v}"),
        BoundSource::Channel(name) => out.write_str(name),
    }
}

fn write_atom(out: &mut fmt::Formatter<'_>, a: &Atom) -> fmt::Result {
    match a {
        Atom::Cmp { expr, op, bound } => {
            write_expr(out, expr)?;
            let op = match op {
                CmpOp::Lt => " < ",
                CmpOp::Gt => " > ",
            };
            // fold any programmatic constant into the bound
            write!(out, "{op}{}", bound - expr.constant)
        }
        Atom::InBox {
            x_chan,
            y_chan,
            x_lb,
            x_ub,
            y_lb,
            y_ub,
        } => {
            write!(out, "in_box({x_chan}, {y_chan}, ")?;
            write_bound(out, x_lb)?;
            out.write_str(", ")?;
            write_bound(out, x_ub)?;
            out.write_str(", ")?;
            write_bound(out, y_lb)?;
            out.write_str(", ")?;
            write_bound(out, y_ub)?;
            out.write_char(')')
        }
    }
}

fn write_prec(out: &mut fmt::Formatter<'_>, f: &Formula, required: u8) -> fmt::Result {
    if level(f) < required {
        out.write_char('(')?;
        write_prec(out, f, 0)?;
        return out.write_char(')');
    }
    match f {
        Formula::Atom(a) => write_atom(out, a),
        Formula::Not(inner) => {
            out.write_char('!')?;
            // parenthesize comparison atoms under negation for readability
            if matches!(**inner, Formula::Atom(Atom::Cmp { .. })) {
                out.write_char('(')?;
                write_prec(out, inner, 0)?;
                out.write_char(')')
            } else {
                write_prec(out, inner, 3)
            }
        }
        Formula::And(a, b) => {
            write_prec(out, a, 2)?;
            out.write_str(" & ")?;
            write_prec(out, b, 3)
        }
        Formula::Or(a, b) => {
            write_prec(out, a, 1)?;
            out.write_str(" | ")?;
            write_prec(out, b, 2)
        }
        Formula::Eventually(iv, body) => {
            out.write_char('F')?;
            write_interval(out, iv)?;
            out.write_char(' ')?;
            write_prec(out, body, 3)
        }
        Formula::Globally(iv, body) => {
            out.write_char('G')?;
            write_interval(out, iv)?;
            out.write_char(' ')?;
            write_prec(out, body, 3)
        }
        Formula::Until(iv, lhs, rhs) => {
            write_prec(out, lhs, 1)?;
            out.write_str(" U")?;
            write_interval(out, iv)?;
            out.write_char(' ')?;
            write_prec(out, rhs, 1)
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prec(out, self, 0)
    }
}
