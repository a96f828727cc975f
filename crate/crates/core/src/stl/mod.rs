//! Signal temporal logic: abstract syntax, parsing, Boolean satisfaction,
//! quantitative robustness, and sub-specification splitting.
//!
//! Formulas are interpreted over discrete-time [`Trace`]s: temporal intervals
//! `[a, b]` are step indices, not seconds. Atoms are affine predicates
//! `w . s + offset ~ threshold` over the state vector.

mod parser;
mod semantics;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

pub use parser::{parse_stl, ParseError};
pub use semantics::{eval_boolean, robustness, EvalError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl Comparator {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
            Comparator::Eq => "=",
        }
    }
}

/// Discrete time-step interval `[lo, hi]`, both inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    pub lo: usize,
    pub hi: usize,
}

impl Interval {
    pub fn new(lo: usize, hi: usize) -> Option<Self> {
        (lo <= hi).then_some(Interval { lo, hi })
    }
}

/// Affine predicate `coeffs . state + offset ~ threshold`.
///
/// `coeffs` is indexed like the state vector of the trace the formula is
/// evaluated on; unused variables carry coefficient zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub coeffs: Vec<f64>,
    pub offset: f64,
    pub cmp: Comparator,
    pub threshold: f64,
}

impl Atom {
    /// Value of the affine expression at a state.
    pub fn value(&self, state: &[f64]) -> f64 {
        self.coeffs.iter().zip(state).map(|(c, x)| c * x).sum::<f64>() + self.offset
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StlFormula {
    True,
    False,
    Atom(Atom),
    Not(Box<StlFormula>),
    And(Box<StlFormula>, Box<StlFormula>),
    Or(Box<StlFormula>, Box<StlFormula>),
    Implies(Box<StlFormula>, Box<StlFormula>),
    Always(Interval, Box<StlFormula>),
    Eventually(Interval, Box<StlFormula>),
    Until(Interval, Box<StlFormula>, Box<StlFormula>),
}

impl StlFormula {
    pub fn atom(coeffs: Vec<f64>, offset: f64, cmp: Comparator, threshold: f64) -> Self {
        StlFormula::Atom(Atom { coeffs, offset, cmp, threshold })
    }

    /// Single-variable predicate `var ~ threshold` over a `dim`-dimensional state.
    pub fn var_cmp(dim: usize, var: usize, cmp: Comparator, threshold: f64) -> Self {
        let mut coeffs = alloc::vec![0.0; dim];
        coeffs[var] = 1.0;
        StlFormula::atom(coeffs, 0.0, cmp, threshold)
    }

    /// Render the formula in the surface grammar, so that parsing the result
    /// with the same variable order yields a structurally equal AST.
    pub fn pretty(&self, vars: &[String]) -> String {
        let mut out = String::new();
        self.write_pretty(vars, &mut out);
        out
    }

    fn write_pretty(&self, vars: &[String], out: &mut String) {
        match self {
            StlFormula::True => out.push_str("true"),
            StlFormula::False => out.push_str("false"),
            StlFormula::Atom(a) => {
                let mut first = true;
                for (i, &c) in a.coeffs.iter().enumerate() {
                    if c != 0.0 {
                        if !first {
                            out.push_str(" + ");
                        }
                        let _ = write!(out, "{}*{}", c, vars[i]);
                        first = false;
                    }
                }
                if a.offset != 0.0 || first {
                    if !first {
                        out.push_str(" + ");
                    }
                    let _ = write!(out, "{}", a.offset);
                }
                let _ = write!(out, " {} {}", a.cmp.symbol(), a.threshold);
            }
            StlFormula::Not(p) => {
                out.push_str("not (");
                p.write_pretty(vars, out);
                out.push(')');
            }
            StlFormula::And(p, q) => Self::write_binary(vars, out, p, "and", q),
            StlFormula::Or(p, q) => Self::write_binary(vars, out, p, "or", q),
            StlFormula::Implies(p, q) => Self::write_binary(vars, out, p, "->", q),
            StlFormula::Always(i, p) => {
                let _ = write!(out, "always[{},{}] (", i.lo, i.hi);
                p.write_pretty(vars, out);
                out.push(')');
            }
            StlFormula::Eventually(i, p) => {
                let _ = write!(out, "eventually[{},{}] (", i.lo, i.hi);
                p.write_pretty(vars, out);
                out.push(')');
            }
            StlFormula::Until(i, p, q) => {
                out.push_str("((");
                p.write_pretty(vars, out);
                let _ = write!(out, ") until[{},{}] (", i.lo, i.hi);
                q.write_pretty(vars, out);
                out.push_str("))");
            }
        }
    }

    fn write_binary(vars: &[String], out: &mut String, p: &StlFormula, op: &str, q: &StlFormula) {
        out.push('(');
        p.write_pretty(vars, out);
        out.push(' ');
        out.push_str(op);
        out.push(' ');
        q.write_pretty(vars, out);
        out.push(')');
    }
}

/// A conjunctive specification separated into independently falsifiable parts.
#[derive(Debug, Clone, PartialEq)]
pub struct SubSpecSet {
    pub subs: Vec<StlFormula>,
    pub origin: StlFormula,
}

impl SubSpecSet {
    pub fn len(&self) -> usize {
        self.subs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subs.is_empty()
    }
}

/// Distribute a top-level `always` (or a bare conjunction) over its conjuncts.
///
/// Valid for `always` because min commutes with min, so the pointwise minimum
/// of the sub-specification robustness values equals the parent's robustness
/// on every trace. Any other shape is returned as a single sub-specification.
pub fn split_conjunctive(phi: &StlFormula) -> SubSpecSet {
    let subs = match phi {
        StlFormula::Always(interval, body) => {
            let leaves = flatten_and(body);
            leaves
                .into_iter()
                .map(|leaf| StlFormula::Always(*interval, Box::new(leaf.clone())))
                .collect()
        }
        StlFormula::And(..) => flatten_and(phi).into_iter().cloned().collect(),
        other => alloc::vec![other.clone()],
    };
    SubSpecSet { subs, origin: phi.clone() }
}

fn flatten_and(phi: &StlFormula) -> Vec<&StlFormula> {
    let mut leaves = Vec::new();
    fn walk<'a>(phi: &'a StlFormula, out: &mut Vec<&'a StlFormula>) {
        match phi {
            StlFormula::And(p, q) => {
                walk(p, out);
                walk(q, out);
            }
            leaf => out.push(leaf),
        }
    }
    walk(phi, &mut leaves);
    leaves
}
