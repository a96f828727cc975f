//! Randomized cross-checks of the STL monitor against an independent
//! brute-force evaluator, plus algebraic robustness properties.

use falsify_core::rng;
use falsify_core::stl::{
    eval_boolean, parse_stl, robustness, split_conjunctive, Atom, Comparator, Interval, StlFormula,
};
use falsify_core::trace::Trace;
use rand::Rng;

// ---------------------------------------------------------------------------
// independent naive evaluator, written directly from the recursive semantics

fn brute_robustness(phi: &StlFormula, trace: &Trace, t: usize) -> f64 {
    match phi {
        StlFormula::True => f64::INFINITY,
        StlFormula::False => f64::NEG_INFINITY,
        StlFormula::Atom(a) => {
            let f: f64 =
                a.coeffs.iter().zip(&trace.states[t]).map(|(c, x)| c * x).sum::<f64>() + a.offset;
            match a.cmp {
                Comparator::Lt | Comparator::Le => a.threshold - f,
                Comparator::Gt | Comparator::Ge => f - a.threshold,
                Comparator::Eq => -(f - a.threshold).abs(),
            }
        }
        StlFormula::Not(p) => -brute_robustness(p, trace, t),
        StlFormula::And(p, q) => {
            brute_robustness(p, trace, t).min(brute_robustness(q, trace, t))
        }
        StlFormula::Or(p, q) => brute_robustness(p, trace, t).max(brute_robustness(q, trace, t)),
        StlFormula::Implies(p, q) => {
            (-brute_robustness(p, trace, t)).max(brute_robustness(q, trace, t))
        }
        StlFormula::Always(i, p) => brute_window(i, trace, t)
            .map(|u| brute_robustness(p, trace, u))
            .fold(f64::INFINITY, f64::min),
        StlFormula::Eventually(i, p) => brute_window(i, trace, t)
            .map(|u| brute_robustness(p, trace, u))
            .fold(f64::NEG_INFINITY, f64::max),
        StlFormula::Until(i, p, q) => brute_window(i, trace, t)
            .map(|u| {
                let hold = (t..=u)
                    .map(|v| brute_robustness(p, trace, v))
                    .fold(f64::INFINITY, f64::min);
                brute_robustness(q, trace, u).min(hold)
            })
            .fold(f64::NEG_INFINITY, f64::max),
    }
}

fn brute_boolean(phi: &StlFormula, trace: &Trace, t: usize) -> bool {
    match phi {
        StlFormula::True => true,
        StlFormula::False => false,
        StlFormula::Atom(a) => {
            let f: f64 =
                a.coeffs.iter().zip(&trace.states[t]).map(|(c, x)| c * x).sum::<f64>() + a.offset;
            match a.cmp {
                Comparator::Lt => f < a.threshold,
                Comparator::Le => f <= a.threshold,
                Comparator::Gt => f > a.threshold,
                Comparator::Ge => f >= a.threshold,
                Comparator::Eq => f == a.threshold,
            }
        }
        StlFormula::Not(p) => !brute_boolean(p, trace, t),
        StlFormula::And(p, q) => brute_boolean(p, trace, t) && brute_boolean(q, trace, t),
        StlFormula::Or(p, q) => brute_boolean(p, trace, t) || brute_boolean(q, trace, t),
        StlFormula::Implies(p, q) => !brute_boolean(p, trace, t) || brute_boolean(q, trace, t),
        StlFormula::Always(i, p) => brute_window(i, trace, t).all(|u| brute_boolean(p, trace, u)),
        StlFormula::Eventually(i, p) => {
            brute_window(i, trace, t).any(|u| brute_boolean(p, trace, u))
        }
        StlFormula::Until(i, p, q) => brute_window(i, trace, t).any(|u| {
            brute_boolean(q, trace, u) && (t..=u).all(|v| brute_boolean(p, trace, v))
        }),
    }
}

fn brute_window(i: &Interval, trace: &Trace, t: usize) -> impl Iterator<Item = usize> {
    let start = t + i.lo;
    let end = (t + i.hi).min(trace.len() - 1);
    start..=end
}

// ---------------------------------------------------------------------------
// random generators

const VARS: [&str; 2] = ["x", "y"];

fn random_atom<R: Rng>(rng: &mut R) -> StlFormula {
    let coeffs: Vec<f64> = (0..VARS.len()).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
    let offset = rng.random::<f64>() * 2.0 - 1.0;
    let cmp = match rng.random_range(0..5) {
        0 => Comparator::Lt,
        1 => Comparator::Le,
        2 => Comparator::Gt,
        3 => Comparator::Ge,
        _ => Comparator::Eq,
    };
    let threshold = rng.random::<f64>() * 4.0 - 2.0;
    StlFormula::Atom(Atom { coeffs, offset, cmp, threshold })
}

fn random_interval<R: Rng>(rng: &mut R) -> Interval {
    // keep lower bounds at 0: a nested window whose start lands past the
    // trace end is an evaluation error, and clipping the *outer* window to
    // the last step would otherwise make that reachable
    Interval::new(0, rng.random_range(0..=5usize)).unwrap()
}

fn random_formula<R: Rng>(rng: &mut R, depth: usize) -> StlFormula {
    if depth == 0 {
        return match rng.random_range(0..10) {
            0 => StlFormula::True,
            1 => StlFormula::False,
            _ => random_atom(rng),
        };
    }
    match rng.random_range(0..8) {
        0 => random_atom(rng),
        1 => StlFormula::Not(Box::new(random_formula(rng, depth - 1))),
        2 => StlFormula::And(
            Box::new(random_formula(rng, depth - 1)),
            Box::new(random_formula(rng, depth - 1)),
        ),
        3 => StlFormula::Or(
            Box::new(random_formula(rng, depth - 1)),
            Box::new(random_formula(rng, depth - 1)),
        ),
        4 => StlFormula::Implies(
            Box::new(random_formula(rng, depth - 1)),
            Box::new(random_formula(rng, depth - 1)),
        ),
        5 => StlFormula::Always(random_interval(rng), Box::new(random_formula(rng, depth - 1))),
        6 => StlFormula::Eventually(random_interval(rng), Box::new(random_formula(rng, depth - 1))),
        _ => StlFormula::Until(
            random_interval(rng),
            Box::new(random_formula(rng, depth - 1)),
            Box::new(random_formula(rng, depth - 1)),
        ),
    }
}

fn random_trace<R: Rng>(rng: &mut R) -> Trace {
    let len = rng.random_range(9..=12usize);
    let states = (0..len)
        .map(|_| (0..VARS.len()).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect())
        .collect();
    Trace::new(0.1, VARS.iter().map(|s| s.to_string()).collect(), states).unwrap()
}

// ---------------------------------------------------------------------------

#[test]
fn robustness_matches_brute_force_on_500_random_pairs() {
    let mut rng = rng::stream(2024);
    for case in 0..500 {
        let phi = random_formula(&mut rng, 4);
        let trace = random_trace(&mut rng);
        let got = robustness(&phi, &trace, 0).unwrap();
        let expected = brute_robustness(&phi, &trace, 0);
        assert!(
            (got - expected).abs() < 1e-9 || got == expected,
            "case {case}: got {got}, expected {expected}"
        );
        let sat = eval_boolean(&phi, &trace, 0).unwrap();
        assert_eq!(sat, brute_boolean(&phi, &trace, 0), "case {case}: boolean mismatch");
        if got > 0.0 {
            assert!(sat, "case {case}: positive robustness but unsatisfied");
        }
        if got < 0.0 {
            assert!(!sat, "case {case}: negative robustness but satisfied");
        }
    }
}

#[test]
fn round_trip_200_random_formulas() {
    let vars: Vec<String> = VARS.iter().map(|s| s.to_string()).collect();
    let mut rng = rng::stream(7);
    for case in 0..200 {
        let phi = random_formula(&mut rng, 4);
        let printed = phi.pretty(&vars);
        let reparsed = parse_stl(&printed, &vars)
            .unwrap_or_else(|e| panic!("case {case}: failed to reparse `{printed}`: {e}"));
        assert_eq!(reparsed, phi, "case {case}: `{printed}`");
    }
}

#[test]
fn negation_flips_robustness() {
    let mut rng = rng::stream(11);
    for _ in 0..100 {
        let phi = random_formula(&mut rng, 3);
        let trace = random_trace(&mut rng);
        let pos = robustness(&phi, &trace, 0).unwrap();
        let neg = robustness(&StlFormula::Not(Box::new(phi)), &trace, 0).unwrap();
        assert_eq!(neg, -pos);
    }
}

#[test]
fn conjunction_is_min_disjunction_is_max() {
    let mut rng = rng::stream(13);
    for _ in 0..100 {
        let p = random_formula(&mut rng, 3);
        let q = random_formula(&mut rng, 3);
        let trace = random_trace(&mut rng);
        let rp = robustness(&p, &trace, 0).unwrap();
        let rq = robustness(&q, &trace, 0).unwrap();
        let and = StlFormula::And(Box::new(p.clone()), Box::new(q.clone()));
        let or = StlFormula::Or(Box::new(p), Box::new(q));
        assert_eq!(robustness(&and, &trace, 0).unwrap(), rp.min(rq));
        assert_eq!(robustness(&or, &trace, 0).unwrap(), rp.max(rq));
    }
}

#[test]
fn eventually_always_duality() {
    let mut rng = rng::stream(17);
    for _ in 0..100 {
        let body = random_formula(&mut rng, 2);
        let i = random_interval(&mut rng);
        let trace = random_trace(&mut rng);
        let eventually = StlFormula::Eventually(i, Box::new(body.clone()));
        let dual = StlFormula::Always(i, Box::new(StlFormula::Not(Box::new(body))));
        let lhs = robustness(&eventually, &trace, 0).unwrap();
        let rhs = -robustness(&dual, &trace, 0).unwrap();
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn split_soundness_on_random_traces() {
    let vars: Vec<String> = VARS.iter().map(|s| s.to_string()).collect();
    let specs = [
        "always[0,8] (abs(x) < 1.5 and abs(y) < 0.5)",
        "always[0,5] (x < 1 and y > -1 and x + y < 2)",
        "x < 1 and y < 1",
        "eventually[0,5] (x < 0)", // non-conjunctive: singleton split
    ];
    let mut rng = rng::stream(19);
    for spec in specs {
        let phi = parse_stl(spec, &vars).unwrap();
        let set = split_conjunctive(&phi);
        for _ in 0..100 {
            let trace = random_trace(&mut rng);
            let parent = robustness(&phi, &trace, 0).unwrap();
            let min_sub = set
                .subs
                .iter()
                .map(|s| robustness(s, &trace, 0).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert_eq!(parent, min_sub, "spec `{spec}`");
        }
    }
}
