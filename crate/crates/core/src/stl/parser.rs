//! Recursive-descent parser for the STL surface grammar.
//!
//! ```text
//! formula  := implies
//! implies  := or ("->" implies)?
//! or       := and ("or" and)*
//! and      := until ("and" until)*
//! until    := unary ("until" "[" int "," int "]" unary)*
//! unary    := "always" "[" int "," int "]" "(" formula ")"
//!           | "eventually" "[" int "," int "]" "(" formula ")"
//!           | "not" "(" formula ")"
//!           | "true" | "false"
//!           | "(" formula ")"
//!           | atom
//! atom     := expr cmp number | "abs" "(" expr ")" cmp number
//! expr     := ["-"] term (("+" | "-") term)*
//! term     := number "*" ident | ident | number
//! cmp      := "<" | "<=" | ">" | ">=" | "="
//! ```
//!
//! `abs` atoms are desugared at parse time: `abs(e) < c` becomes
//! `(e < c) and (e > -c)`, and dually with `or` for `>`-style comparators.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::{Atom, Comparator, Interval, StlFormula};

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at {}:{}: {}", self.line, self.col, self.message)
    }
}

impl core::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Plus,
    Minus,
    Star,
    Arrow,
    Cmp(Comparator),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn err<T>(line: usize, col: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, col, message: message.into() })
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut toks = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        let mut bump = |chars: &mut core::iter::Peekable<core::str::Chars>| {
            let c = chars.next();
            if c == Some('\n') {
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
            }
            '(' => {
                bump(&mut chars);
                toks.push(Spanned { tok: Tok::LParen, line: tl, col: tc });
            }
            ')' => {
                bump(&mut chars);
                toks.push(Spanned { tok: Tok::RParen, line: tl, col: tc });
            }
            '[' => {
                bump(&mut chars);
                toks.push(Spanned { tok: Tok::LBracket, line: tl, col: tc });
            }
            ']' => {
                bump(&mut chars);
                toks.push(Spanned { tok: Tok::RBracket, line: tl, col: tc });
            }
            ',' => {
                bump(&mut chars);
                toks.push(Spanned { tok: Tok::Comma, line: tl, col: tc });
            }
            '+' => {
                bump(&mut chars);
                toks.push(Spanned { tok: Tok::Plus, line: tl, col: tc });
            }
            '*' => {
                bump(&mut chars);
                toks.push(Spanned { tok: Tok::Star, line: tl, col: tc });
            }
            '-' => {
                bump(&mut chars);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    toks.push(Spanned { tok: Tok::Arrow, line: tl, col: tc });
                } else {
                    toks.push(Spanned { tok: Tok::Minus, line: tl, col: tc });
                }
            }
            '<' => {
                bump(&mut chars);
                let cmp = if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    Comparator::Le
                } else {
                    Comparator::Lt
                };
                toks.push(Spanned { tok: Tok::Cmp(cmp), line: tl, col: tc });
            }
            '>' => {
                bump(&mut chars);
                let cmp = if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    Comparator::Ge
                } else {
                    Comparator::Gt
                };
                toks.push(Spanned { tok: Tok::Cmp(cmp), line: tl, col: tc });
            }
            '=' => {
                bump(&mut chars);
                toks.push(Spanned { tok: Tok::Cmp(Comparator::Eq), line: tl, col: tc });
            }
            c if c.is_ascii_digit() || c == '.' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() || d == '.' {
                        s.push(d);
                        bump(&mut chars);
                    } else if d == 'e' || d == 'E' {
                        // exponent; may be followed by a sign
                        s.push(d);
                        bump(&mut chars);
                        if let Some(&sign @ ('+' | '-')) = chars.peek() {
                            s.push(sign);
                            bump(&mut chars);
                        }
                    } else {
                        break;
                    }
                }
                match s.parse::<f64>() {
                    Ok(v) => toks.push(Spanned { tok: Tok::Number(v), line: tl, col: tc }),
                    Err(_) => return err(tl, tc, alloc::format!("invalid number `{s}`")),
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        s.push(d);
                        bump(&mut chars);
                    } else {
                        break;
                    }
                }
                toks.push(Spanned { tok: Tok::Ident(s), line: tl, col: tc });
            }
            other => return err(tl, tc, alloc::format!("unexpected character `{other}`")),
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    vars: &'a [String],
}

/// Parse an STL specification. `state_vars` fixes the order and dimension of
/// atom coefficient vectors; every identifier in `text` must appear in it.
pub fn parse_stl(text: &str, state_vars: &[String]) -> Result<StlFormula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, vars: state_vars };
    let phi = p.formula()?;
    if let Some(t) = p.peek() {
        return err(t.line, t.col, "trailing input after formula");
    }
    Ok(phi)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn end_pos(&self) -> (usize, usize) {
        self.toks.last().map(|t| (t.line, t.col + 1)).unwrap_or((1, 1))
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<(), ParseError> {
        match self.next() {
            Some(t) if &t.tok == want => Ok(()),
            Some(t) => err(t.line, t.col, alloc::format!("expected {what}")),
            None => {
                let (l, c) = self.end_pos();
                err(l, c, alloc::format!("expected {what}, found end of input"))
            }
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Spanned { tok: Tok::Ident(s), .. }) if s == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn formula(&mut self) -> Result<StlFormula, ParseError> {
        self.implies()
    }

    fn implies(&mut self) -> Result<StlFormula, ParseError> {
        let lhs = self.or()?;
        if matches!(self.peek(), Some(Spanned { tok: Tok::Arrow, .. })) {
            self.pos += 1;
            let rhs = self.implies()?;
            Ok(StlFormula::Implies(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<StlFormula, ParseError> {
        let mut lhs = self.and()?;
        while self.eat_keyword("or") {
            let rhs = self.and()?;
            lhs = StlFormula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<StlFormula, ParseError> {
        let mut lhs = self.until()?;
        while self.eat_keyword("and") {
            let rhs = self.until()?;
            lhs = StlFormula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<StlFormula, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat_keyword("until") {
            let interval = self.interval()?;
            let rhs = self.unary()?;
            lhs = StlFormula::Until(interval, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn interval(&mut self) -> Result<Interval, ParseError> {
        self.expect(&Tok::LBracket, "`[`")?;
        let (lo, neg_lo, pos_lo) = self.interval_bound()?;
        self.expect(&Tok::Comma, "`,`")?;
        let (hi, neg_hi, pos_hi) = self.interval_bound()?;
        self.expect(&Tok::RBracket, "`]`")?;
        if neg_lo {
            return err(pos_lo.0, pos_lo.1, "interval bound must be non-negative");
        }
        if neg_hi {
            return err(pos_hi.0, pos_hi.1, "interval bound must be non-negative");
        }
        match Interval::new(lo, hi) {
            Some(i) => Ok(i),
            None => err(pos_lo.0, pos_lo.1, alloc::format!("invalid interval [{lo},{hi}]: lower bound exceeds upper")),
        }
    }

    fn interval_bound(&mut self) -> Result<(usize, bool, (usize, usize)), ParseError> {
        let negative = if matches!(self.peek(), Some(Spanned { tok: Tok::Minus, .. })) {
            self.pos += 1;
            true
        } else {
            false
        };
        match self.next() {
            Some(Spanned { tok: Tok::Number(v), line, col }) => {
                if v != libm::trunc(v) {
                    return err(line, col, "interval bound must be an integer");
                }
                Ok((v as usize, negative && v != 0.0, (line, col)))
            }
            Some(t) => err(t.line, t.col, "expected integer interval bound"),
            None => {
                let (l, c) = self.end_pos();
                err(l, c, "expected interval bound, found end of input")
            }
        }
    }

    fn unary(&mut self) -> Result<StlFormula, ParseError> {
        if self.eat_keyword("always") {
            let i = self.interval()?;
            self.expect(&Tok::LParen, "`(`")?;
            let body = self.formula()?;
            self.expect(&Tok::RParen, "`)`")?;
            return Ok(StlFormula::Always(i, Box::new(body)));
        }
        if self.eat_keyword("eventually") {
            let i = self.interval()?;
            self.expect(&Tok::LParen, "`(`")?;
            let body = self.formula()?;
            self.expect(&Tok::RParen, "`)`")?;
            return Ok(StlFormula::Eventually(i, Box::new(body)));
        }
        if self.eat_keyword("not") {
            self.expect(&Tok::LParen, "`(`")?;
            let body = self.formula()?;
            self.expect(&Tok::RParen, "`)`")?;
            return Ok(StlFormula::Not(Box::new(body)));
        }
        if self.eat_keyword("true") {
            return Ok(StlFormula::True);
        }
        if self.eat_keyword("false") {
            return Ok(StlFormula::False);
        }
        if self.is_keyword("abs") {
            return self.abs_atom();
        }
        if matches!(self.peek(), Some(Spanned { tok: Tok::LParen, .. })) {
            self.pos += 1;
            let body = self.formula()?;
            self.expect(&Tok::RParen, "`)`")?;
            return Ok(body);
        }
        self.plain_atom()
    }

    fn abs_atom(&mut self) -> Result<StlFormula, ParseError> {
        self.eat_keyword("abs");
        self.expect(&Tok::LParen, "`(`")?;
        let (coeffs, offset) = self.linear_expr()?;
        self.expect(&Tok::RParen, "`)`")?;
        let cmp = self.comparator()?;
        let threshold = self.signed_number()?;
        let pos = Atom { coeffs: coeffs.clone(), offset, cmp: cmp_pos(cmp), threshold };
        let neg = Atom { coeffs, offset, cmp: cmp_neg(cmp), threshold: -threshold };
        let (pos, neg) = (StlFormula::Atom(pos), StlFormula::Atom(neg));
        Ok(match cmp {
            Comparator::Lt | Comparator::Le => StlFormula::And(Box::new(pos), Box::new(neg)),
            Comparator::Gt | Comparator::Ge | Comparator::Eq => {
                StlFormula::Or(Box::new(pos), Box::new(neg))
            }
        })
    }

    fn plain_atom(&mut self) -> Result<StlFormula, ParseError> {
        let (coeffs, offset) = self.linear_expr()?;
        let cmp = self.comparator()?;
        let threshold = self.signed_number()?;
        Ok(StlFormula::Atom(Atom { coeffs, offset, cmp, threshold }))
    }

    fn comparator(&mut self) -> Result<Comparator, ParseError> {
        match self.next() {
            Some(Spanned { tok: Tok::Cmp(c), .. }) => Ok(c),
            Some(t) => err(t.line, t.col, "expected comparator"),
            None => {
                let (l, c) = self.end_pos();
                err(l, c, "expected comparator, found end of input")
            }
        }
    }

    fn signed_number(&mut self) -> Result<f64, ParseError> {
        let negative = if matches!(self.peek(), Some(Spanned { tok: Tok::Minus, .. })) {
            self.pos += 1;
            true
        } else {
            false
        };
        match self.next() {
            Some(Spanned { tok: Tok::Number(v), .. }) => Ok(if negative { -v } else { v }),
            Some(t) => err(t.line, t.col, "expected number"),
            None => {
                let (l, c) = self.end_pos();
                err(l, c, "expected number, found end of input")
            }
        }
    }

    /// Linear combination of state variables plus a constant offset.
    fn linear_expr(&mut self) -> Result<(Vec<f64>, f64), ParseError> {
        let mut coeffs = alloc::vec![0.0; self.vars.len()];
        let mut offset = 0.0;
        let mut sign = 1.0;
        if matches!(self.peek(), Some(Spanned { tok: Tok::Minus, .. })) {
            self.pos += 1;
            sign = -1.0;
        }
        self.term(sign, &mut coeffs, &mut offset)?;
        loop {
            let sign = match self.peek() {
                Some(Spanned { tok: Tok::Plus, .. }) => 1.0,
                Some(Spanned { tok: Tok::Minus, .. }) => -1.0,
                _ => break,
            };
            self.pos += 1;
            // allow `+ -0.5*x` as produced by pretty-printing negative coefficients
            let sign = if matches!(self.peek(), Some(Spanned { tok: Tok::Minus, .. })) {
                self.pos += 1;
                -sign
            } else {
                sign
            };
            self.term(sign, &mut coeffs, &mut offset)?;
        }
        Ok((coeffs, offset))
    }

    fn term(&mut self, sign: f64, coeffs: &mut [f64], offset: &mut f64) -> Result<(), ParseError> {
        match self.next() {
            Some(Spanned { tok: Tok::Number(v), .. }) => {
                if matches!(self.peek(), Some(Spanned { tok: Tok::Star, .. })) {
                    self.pos += 1;
                    let idx = self.variable()?;
                    coeffs[idx] += sign * v;
                } else {
                    *offset += sign * v;
                }
                Ok(())
            }
            Some(Spanned { tok: Tok::Ident(name), line, col }) => {
                match self.vars.iter().position(|v| *v == name) {
                    Some(idx) => {
                        coeffs[idx] += sign;
                        Ok(())
                    }
                    None => err(line, col, alloc::format!("unknown variable `{name}`")),
                }
            }
            Some(t) => err(t.line, t.col, "expected term"),
            None => {
                let (l, c) = self.end_pos();
                err(l, c, "expected term, found end of input")
            }
        }
    }

    fn variable(&mut self) -> Result<usize, ParseError> {
        match self.next() {
            Some(Spanned { tok: Tok::Ident(name), line, col }) => {
                match self.vars.iter().position(|v| *v == name) {
                    Some(idx) => Ok(idx),
                    None => err(line, col, alloc::format!("unknown variable `{name}`")),
                }
            }
            Some(t) => err(t.line, t.col, "expected variable name"),
            None => {
                let (l, c) = self.end_pos();
                err(l, c, "expected variable name, found end of input")
            }
        }
    }
}

// Comparator pair used when desugaring `abs(e) ~ c`.
fn cmp_pos(c: Comparator) -> Comparator {
    c
}

fn cmp_neg(c: Comparator) -> Comparator {
    match c {
        Comparator::Lt => Comparator::Gt,
        Comparator::Le => Comparator::Ge,
        Comparator::Gt => Comparator::Lt,
        Comparator::Ge => Comparator::Le,
        Comparator::Eq => Comparator::Eq,
    }
}
