//! Recursive-descent parser for the formula language.
//!
//! ```text
//! formula  := until
//! until    := or ( 'U' interval or )*          // left-associative
//! or       := and ( '|' and )*
//! and      := unary ( '&' unary )*
//! unary    := '!' unary | 'G' interval unary | 'F' interval unary | primary
//! primary  := '(' formula ')' | atom
//! interval := '[' number ',' number ']'
//! atom     := linexpr ('<'|'>') number
//!           | 'in_box' '(' chan ',' chan ',' bound ',' bound ',' bound ',' bound ')'
//! linexpr  := term (('+'|'-') term)*
//! term     := [number '*'] chan
//! bound    := number | chan
//! chan     := identifier
//! ```
//!
//! Whitespace is insignificant. Numbers are decimal reals; a unary minus is
//! accepted wherever a number or leading term is expected. `U`, `G`, `F`, and
//! `in_box` are reserved words and cannot name channels.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::{Atom, BoundSource, CmpOp, Formula, Interval, LinExpr};
use super::StlError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Lt,
    Gt,
    Bang,
    Amp,
    Pipe,
    Plus,
    Minus,
    Star,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn err_at(line: usize, col: usize, msg: impl Into<String>) -> StlError {
    StlError::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Spanned>, StlError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let mut bump = |chars: &mut core::iter::Peekable<core::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump(&mut chars);
                continue;
            }
            '(' | ')' | '[' | ']' | ',' | '<' | '>' | '!' | '&' | '|' | '+' | '-' | '*' => {
                bump(&mut chars);
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ',' => Tok::Comma,
                    '<' => Tok::Lt,
                    '>' => Tok::Gt,
                    '!' => Tok::Bang,
                    '&' => Tok::Amp,
                    '|' => Tok::Pipe,
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    _ => Tok::Star,
                };
                out.push(Spanned {
                    tok,
                    line: tline,
                    col: tcol,
                });
            }
            '0'..='9' | '.' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() || d == '.' {
                        s.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                if let Some(&e) = chars.peek() {
                    if e == 'e' || e == 'E' {
                        s.push(bump(&mut chars));
                        if let Some(&sign) = chars.peek() {
                            if sign == '+' || sign == '-' {
                                s.push(bump(&mut chars));
                            }
                        }
                        let mut any = false;
                        while let Some(&d) = chars.peek() {
                            if d.is_ascii_digit() {
                                s.push(bump(&mut chars));
                                any = true;
                            } else {
                                break;
                            }
                        }
                        if !any {
                            return Err(err_at(tline, tcol, "malformed exponent in number"));
                        }
                    }
                }
                let value: f64 = s
                    .parse()
                    .map_err(|_| err_at(tline, tcol, format!("malformed number `{s}`")))?;
                out.push(Spanned {
                    tok: Tok::Number(value),
                    line: tline,
                    col: tcol,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        s.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                out.push(Spanned {
                    tok: Tok::Ident(s),
                    line: tline,
                    col: tcol,
                });
            }
            other => {
                return Err(err_at(
                    tline,
                    tcol,
                    format!("unexpected character `{other}`"),
                ));
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn peek2(&self) -> Option<&Spanned> {
        self.toks.get(self.pos + 1)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|s| (s.line, s.col))
            .unwrap_or((1, 1))
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), StlError> {
        let (line, col) = self.here();
        match self.next() {
            Some(s) if s.tok == tok => Ok(()),
            Some(s) => Err(err_at(s.line, s.col, format!("expected {what}"))),
            None => Err(err_at(
                line,
                col,
                format!("expected {what}, found end of input"),
            )),
        }
    }

    fn formula(&mut self) -> Result<Formula, StlError> {
        let mut lhs = self.or_expr()?;
        while self.at_ident("U") {
            self.next();
            let iv = self.interval()?;
            let rhs = self.or_expr()?;
            lhs = Formula::until(iv, lhs, rhs);
        }
        Ok(lhs)
    }

    fn at_ident(&self, name: &str) -> bool {
        matches!(self.peek(), Some(Spanned { tok: Tok::Ident(s), .. }) if s == name)
    }

    fn or_expr(&mut self) -> Result<Formula, StlError> {
        let mut lhs = self.and_expr()?;
        while matches!(self.peek().map(|s| &s.tok), Some(Tok::Pipe)) {
            self.next();
            let rhs = self.and_expr()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Formula, StlError> {
        let mut lhs = self.unary()?;
        while matches!(self.peek().map(|s| &s.tok), Some(Tok::Amp)) {
            self.next();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, StlError> {
        if matches!(self.peek().map(|s| &s.tok), Some(Tok::Bang)) {
            self.next();
            return Ok(Formula::not(self.unary()?));
        }
        if self.at_ident("G") || self.at_ident("F") {
            let (line, col) = self.here();
            let name = match self.next().unwrap().tok {
                Tok::Ident(s) => s,
                _ => unreachable!(),
            };
            if !matches!(self.peek().map(|s| &s.tok), Some(Tok::LBracket)) {
                return Err(err_at(
                    line,
                    col,
                    format!("expected `[` after temporal operator `{name}`"),
                ));
            }
            let iv = self.interval()?;
            let body = self.unary()?;
            return Ok(if name == "G" {
                Formula::globally(iv, body)
            } else {
                Formula::eventually(iv, body)
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, StlError> {
        if matches!(self.peek().map(|s| &s.tok), Some(Tok::LParen)) {
            self.next();
            let inner = self.formula()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(inner);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula, StlError> {
        if self.at_ident("in_box") {
            self.next();
            self.expect(Tok::LParen, "`(` after `in_box`")?;
            let x_chan = self.chan()?;
            self.expect(Tok::Comma, "`,`")?;
            let y_chan = self.chan()?;
            self.expect(Tok::Comma, "`,`")?;
            let x_lb = self.bound()?;
            self.expect(Tok::Comma, "`,`")?;
            let x_ub = self.bound()?;
            self.expect(Tok::Comma, "`,`")?;
            let y_lb = self.bound()?;
            self.expect(Tok::Comma, "`,`")?;
            let y_ub = self.bound()?;
            self.expect(Tok::RParen, "`)`")?;
            if let (BoundSource::Const(lo), BoundSource::Const(hi)) = (&x_lb, &x_ub) {
                if lo >= hi {
                    let (line, col) = self.here();
                    return Err(err_at(line, col, "in_box x bounds must satisfy lb < ub"));
                }
            }
            if let (BoundSource::Const(lo), BoundSource::Const(hi)) = (&y_lb, &y_ub) {
                if lo >= hi {
                    let (line, col) = self.here();
                    return Err(err_at(line, col, "in_box y bounds must satisfy lb < ub"));
                }
            }
            return Ok(Formula::Atom(Atom::InBox {
                x_chan,
                y_chan,
                x_lb,
                x_ub,
                y_lb,
                y_ub,
            }));
        }
        // reject unknown function-call syntax early for a clear message
        if let (
            Some(Spanned {
                tok: Tok::Ident(name),
                line,
                col,
            }),
            Some(p2),
        ) = (self.peek(), self.peek2())
        {
            if p2.tok == Tok::LParen {
                return Err(err_at(
                    *line,
                    *col,
                    format!("unknown function name `{name}`"),
                ));
            }
        }
        let expr = self.linexpr()?;
        let op = match self.next() {
            Some(Spanned { tok: Tok::Lt, .. }) => CmpOp::Lt,
            Some(Spanned { tok: Tok::Gt, .. }) => CmpOp::Gt,
            Some(s) => return Err(err_at(s.line, s.col, "expected `<` or `>` in atom")),
            None => {
                let (line, col) = self.here();
                return Err(err_at(line, col, "expected `<` or `>`, found end of input"));
            }
        };
        let bound = self.number()?;
        Ok(Formula::Atom(Atom::Cmp { expr, op, bound }))
    }

    fn linexpr(&mut self) -> Result<LinExpr, StlError> {
        let mut terms = Vec::new();
        let mut negate = false;
        if matches!(self.peek().map(|s| &s.tok), Some(Tok::Minus)) {
            self.next();
            negate = true;
        }
        let (c, name) = self.term()?;
        terms.push((if negate { -c } else { c }, name));
        loop {
            let sign = match self.peek().map(|s| &s.tok) {
                Some(Tok::Plus) => 1.0,
                Some(Tok::Minus) => -1.0,
                _ => break,
            };
            self.next();
            let (c, name) = self.term()?;
            terms.push((sign * c, name));
        }
        let (line, col) = self.here();
        LinExpr::new(terms, 0.0).map_err(|_| err_at(line, col, "duplicate channel in expression"))
    }

    fn term(&mut self) -> Result<(f64, String), StlError> {
        match self.peek().map(|s| s.tok.clone()) {
            Some(Tok::Number(c)) => {
                self.next();
                self.expect(Tok::Star, "`*` between coefficient and channel")?;
                let name = self.chan()?;
                Ok((c, name))
            }
            _ => Ok((1.0, self.chan()?)),
        }
    }

    fn chan(&mut self) -> Result<String, StlError> {
        let (line, col) = self.here();
        match self.next() {
            Some(Spanned {
                tok: Tok::Ident(s),
                line,
                col,
            }) => {
                if s == "U" || s == "G" || s == "F" || s == "in_box" {
                    Err(err_at(
                        line,
                        col,
                        format!("`{s}` is reserved and cannot name a channel"),
                    ))
                } else {
                    Ok(s)
                }
            }
            Some(s) => Err(err_at(s.line, s.col, "expected channel name")),
            None => Err(err_at(
                line,
                col,
                "expected channel name, found end of input",
            )),
        }
    }

    fn number(&mut self) -> Result<f64, StlError> {
        let mut sign = 1.0;
        if matches!(self.peek().map(|s| &s.tok), Some(Tok::Minus)) {
            self.next();
            sign = -1.0;
        }
        let (line, col) = self.here();
        match self.next() {
            Some(Spanned {
                tok: Tok::Number(v),
                ..
            }) => Ok(sign * v),
            Some(s) => Err(err_at(s.line, s.col, "expected number")),
            None => Err(err_at(line, col, "expected number, found end of input")),
        }
    }

    fn bound(&mut self) -> Result<BoundSource, StlError> {
        match self.peek().map(|s| &s.tok) {
            Some(Tok::Ident(_)) => Ok(BoundSource::Channel(self.chan()?)),
            _ => Ok(BoundSource::Const(self.number()?)),
        }
    }

    fn interval(&mut self) -> Result<Interval, StlError> {
        self.expect(Tok::LBracket, "`[`")?;
        let (line, col) = self.here();
        let lo = self.number()?;
        self.expect(Tok::Comma, "`,` in interval")?;
        let hi = self.number()?;
        self.expect(Tok::RBracket, "`]`")?;
        Interval::new(lo, hi).map_err(|e| match e {
            StlError::BadInterval(msg) => err_at(line, col, format!("malformed interval: {msg}")),
            other => other,
        })
    }
}

/// Parses formula text into its syntax tree.
pub fn parse_formula(text: &str) -> Result<Formula, StlError> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(err_at(1, 1, "empty formula"));
    }
    let mut p = Parser { toks, pos: 0 };
    let f = p.formula()?;
    if let Some(s) = p.peek() {
        return Err(err_at(
            s.line,
            s.col,
            "unexpected trailing input after formula".to_string(),
        ));
    }
    Ok(f)
}
