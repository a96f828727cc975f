//! Boolean satisfaction and quantitative robustness over discrete traces.
//!
//! Temporal windows are step-index ranges relative to the evaluation time.
//! A window that extends past the end of the trace is clipped to the last
//! index; a window that starts past the end is an error (traces in this
//! artifact are exactly horizon-length, so clipping only occurs at the
//! boundary).

use core::fmt;

use super::{Comparator, Interval, StlFormula};
use crate::trace::Trace;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    TimeOutOfRange { t: usize, len: usize },
    WindowOutOfRange { start: usize, len: usize },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::TimeOutOfRange { t, len } => {
                write!(f, "time index {t} out of range for trace of length {len}")
            }
            EvalError::WindowOutOfRange { start, len } => {
                write!(f, "temporal window starting at {start} lies entirely past trace of length {len}")
            }
        }
    }
}

impl core::error::Error for EvalError {}

/// Clip `[t+a, t+b]` to the trace; error if even the start is out of range.
fn window(interval: Interval, t: usize, len: usize) -> Result<(usize, usize), EvalError> {
    let start = t + interval.lo;
    if start >= len {
        return Err(EvalError::WindowOutOfRange { start, len });
    }
    let end = (t + interval.hi).min(len - 1);
    Ok((start, end))
}

/// Quantitative robustness of `phi` on `trace` at time step `t`.
///
/// Positive values indicate satisfaction, negative values violation, and the
/// magnitude is the distance to the boundary of the predicate sets. Equality
/// atoms evaluate to `-|f - c|`, which is never positive.
pub fn robustness(phi: &StlFormula, trace: &Trace, t: usize) -> Result<f64, EvalError> {
    let len = trace.len();
    if t >= len {
        return Err(EvalError::TimeOutOfRange { t, len });
    }
    match phi {
        StlFormula::True => Ok(f64::INFINITY),
        StlFormula::False => Ok(f64::NEG_INFINITY),
        StlFormula::Atom(a) => {
            let f = a.value(&trace.states[t]);
            Ok(match a.cmp {
                Comparator::Lt | Comparator::Le => a.threshold - f,
                Comparator::Gt | Comparator::Ge => f - a.threshold,
                Comparator::Eq => -libm::fabs(f - a.threshold),
            })
        }
        StlFormula::Not(p) => Ok(-robustness(p, trace, t)?),
        StlFormula::And(p, q) => Ok(robustness(p, trace, t)?.min(robustness(q, trace, t)?)),
        StlFormula::Or(p, q) => Ok(robustness(p, trace, t)?.max(robustness(q, trace, t)?)),
        StlFormula::Implies(p, q) => Ok((-robustness(p, trace, t)?).max(robustness(q, trace, t)?)),
        StlFormula::Always(i, p) => {
            let (start, end) = window(*i, t, len)?;
            let mut rob = f64::INFINITY;
            for u in start..=end {
                rob = rob.min(robustness(p, trace, u)?);
            }
            Ok(rob)
        }
        StlFormula::Eventually(i, p) => {
            let (start, end) = window(*i, t, len)?;
            let mut rob = f64::NEG_INFINITY;
            for u in start..=end {
                rob = rob.max(robustness(p, trace, u)?);
            }
            Ok(rob)
        }
        StlFormula::Until(i, p, q) => {
            let (start, end) = window(*i, t, len)?;
            let mut rob = f64::NEG_INFINITY;
            for u in start..=end {
                let mut branch = robustness(q, trace, u)?;
                for v in t..=u {
                    branch = branch.min(robustness(p, trace, v)?);
                }
                rob = rob.max(branch);
            }
            Ok(rob)
        }
    }
}

/// Literal Boolean satisfaction of `phi` on `trace` at time step `t`.
///
/// Serves as the sign oracle for [`robustness`]: a strictly positive
/// robustness implies `true` here and a strictly negative one implies
/// `false`; robustness exactly zero is unconstrained.
pub fn eval_boolean(phi: &StlFormula, trace: &Trace, t: usize) -> Result<bool, EvalError> {
    let len = trace.len();
    if t >= len {
        return Err(EvalError::TimeOutOfRange { t, len });
    }
    match phi {
        StlFormula::True => Ok(true),
        StlFormula::False => Ok(false),
        StlFormula::Atom(a) => {
            let f = a.value(&trace.states[t]);
            Ok(match a.cmp {
                Comparator::Lt => f < a.threshold,
                Comparator::Le => f <= a.threshold,
                Comparator::Gt => f > a.threshold,
                Comparator::Ge => f >= a.threshold,
                Comparator::Eq => f == a.threshold,
            })
        }
        StlFormula::Not(p) => Ok(!eval_boolean(p, trace, t)?),
        StlFormula::And(p, q) => Ok(eval_boolean(p, trace, t)? && eval_boolean(q, trace, t)?),
        StlFormula::Or(p, q) => Ok(eval_boolean(p, trace, t)? || eval_boolean(q, trace, t)?),
        StlFormula::Implies(p, q) => Ok(!eval_boolean(p, trace, t)? || eval_boolean(q, trace, t)?),
        StlFormula::Always(i, p) => {
            let (start, end) = window(*i, t, len)?;
            for u in start..=end {
                if !eval_boolean(p, trace, u)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        StlFormula::Eventually(i, p) => {
            let (start, end) = window(*i, t, len)?;
            for u in start..=end {
                if eval_boolean(p, trace, u)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        StlFormula::Until(i, p, q) => {
            let (start, end) = window(*i, t, len)?;
            for u in start..=end {
                if eval_boolean(q, trace, u)? {
                    let mut held = true;
                    for v in t..=u {
                        if !eval_boolean(p, trace, v)? {
                            held = false;
                            break;
                        }
                    }
                    if held {
                        return Ok(true);
                    }
                }
            }
            Ok(false)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stl::parse_stl;
    use alloc::string::ToString;
    use alloc::vec;
    use alloc::vec::Vec;

    fn trace1(values: &[f64]) -> Trace {
        Trace::new(
            1.0,
            vec!["a".to_string()],
            values.iter().map(|&v| vec![v]).collect::<Vec<_>>(),
        )
        .unwrap()
    }

    #[test]
    fn worked_example_is_minus_point_two() {
        let phi = parse_stl("always[0,1] (a < 1.0)", &["a".to_string()]).unwrap();
        let tr = trace1(&[0.5, 1.2]);
        let rob = robustness(&phi, &tr, 0).unwrap();
        assert!((rob - (-0.2)).abs() < 1e-12, "rob = {rob}");
        assert!(!eval_boolean(&phi, &tr, 0).unwrap());
    }

    #[test]
    fn negation_flips_sign() {
        let phi = parse_stl("not (a < 1.0)", &["a".to_string()]).unwrap();
        let tr = trace1(&[0.5]);
        assert_eq!(robustness(&phi, &tr, 0).unwrap(), -0.5);
    }

    #[test]
    fn true_is_satisfied_everywhere() {
        let tr = trace1(&[0.0, 1.0, 2.0]);
        assert!(eval_boolean(&StlFormula::True, &tr, 2).unwrap());
        assert_eq!(robustness(&StlFormula::True, &tr, 0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn equality_robustness_never_positive() {
        let phi = parse_stl("a = 1.0", &["a".to_string()]).unwrap();
        assert_eq!(robustness(&phi, &trace1(&[1.0]), 0).unwrap(), 0.0);
        assert_eq!(robustness(&phi, &trace1(&[1.5]), 0).unwrap(), -0.5);
    }

    #[test]
    fn window_clips_at_trace_end() {
        let phi = parse_stl("always[0,100] (a < 1.0)", &["a".to_string()]).unwrap();
        let tr = trace1(&[0.5, 0.7]);
        assert!((robustness(&phi, &tr, 0).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_window_is_error() {
        let phi = parse_stl("always[5,10] (a < 1.0)", &["a".to_string()]).unwrap();
        let tr = trace1(&[0.5, 0.7]);
        assert!(matches!(
            robustness(&phi, &tr, 0),
            Err(EvalError::WindowOutOfRange { start: 5, len: 2 })
        ));
    }

    #[test]
    fn time_out_of_range_is_error() {
        let phi = parse_stl("a < 1.0", &["a".to_string()]).unwrap();
        let tr = trace1(&[0.5]);
        assert!(matches!(robustness(&phi, &tr, 3), Err(EvalError::TimeOutOfRange { t: 3, len: 1 })));
        assert!(matches!(eval_boolean(&phi, &tr, 3), Err(EvalError::TimeOutOfRange { .. })));
    }

    #[test]
    fn until_semantics_hand_case() {
        // a stays below 3 until it exceeds 2 within [0,3]; the holding
        // condition is required through the switch point inclusive.
        let v = ["a".to_string()];
        let phi = parse_stl("((a < 3) until[0,3] (a > 2))", &v).unwrap();
        let tr = trace1(&[0.2, 0.4, 2.5, 0.0]);
        assert!(eval_boolean(&phi, &tr, 0).unwrap());
        let expected = {
            let q: Vec<f64> = [0.2, 0.4, 2.5, 0.0].iter().map(|a| a - 2.0).collect();
            let p: Vec<f64> = [0.2, 0.4, 2.5, 0.0].iter().map(|a| 3.0 - a).collect();
            (0..=3)
                .map(|u| {
                    let inner = p[0..=u].iter().cloned().fold(f64::INFINITY, f64::min);
                    q[u].min(inner)
                })
                .fold(f64::NEG_INFINITY, f64::max)
        };
        assert_eq!(robustness(&phi, &tr, 0).unwrap(), expected);
    }
}
