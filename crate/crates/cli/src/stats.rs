//! Rank statistics for comparing result samples: Vargha-Delaney A12 effect
//! size and the two-sided Mann-Whitney U test. For small samples the p-value
//! is computed by exact permutation enumeration; larger samples use the
//! normal approximation with tie and continuity corrections.

use anyhow::{bail, Result};

/// Vargha-Delaney A12: probability (with ties split) that a random draw from
/// `xs` exceeds one from `ys`.
pub fn a12(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.is_empty() || ys.is_empty() {
        bail!("a12 requires non-empty samples");
    }
    let mut wins = 0.0;
    for &x in xs {
        for &y in ys {
            if x > y {
                wins += 1.0;
            } else if x == y {
                wins += 0.5;
            }
        }
    }
    Ok(wins / (xs.len() * ys.len()) as f64)
}

/// Categorical effect-size label for an A12 value.
pub fn effect_label(a: f64) -> &'static str {
    if a > 0.71 || a < 0.29 {
        "large"
    } else if a >= 0.64 || a <= 0.36 {
        "medium"
    } else {
        "negligible"
    }
}

fn u_statistic(xs: &[f64], ys: &[f64]) -> f64 {
    let mut wins = 0.0;
    for &x in xs {
        for &y in ys {
            if x > y {
                wins += 1.0;
            } else if x == y {
                wins += 0.5;
            }
        }
    }
    wins
}

/// Standard normal CDF.
fn phi(z: f64) -> f64 {
    0.5 * libm::erfc(-z / core::f64::consts::SQRT_2)
}

fn normal_p(u: f64, xs: &[f64], ys: &[f64]) -> f64 {
    let m = xs.len() as f64;
    let n = ys.len() as f64;
    let total = m + n;
    // tie correction over the pooled sample
    let mut pooled: Vec<f64> = xs.iter().chain(ys).cloned().collect();
    pooled.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i + 1;
        while j < pooled.len() && pooled[j] == pooled[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let var = m * n / 12.0 * ((total + 1.0) - tie_term / (total * (total - 1.0)));
    if var <= 0.0 {
        return 1.0; // all observations tied
    }
    let z = ((u - m * n / 2.0).abs() - 0.5).max(0.0) / var.sqrt();
    (2.0 * (1.0 - phi(z))).clamp(0.0, 1.0)
}

fn exact_p(u_obs: f64, xs: &[f64], ys: &[f64]) -> f64 {
    let pooled: Vec<f64> = xs.iter().chain(ys).cloned().collect();
    let total = pooled.len();
    let m = xs.len();
    let mn_half = (m * ys.len()) as f64 / 2.0;
    let dev_obs = (u_obs - mn_half).abs();
    let mut hits = 0u64;
    let mut count = 0u64;
    // iterate over all m-subsets of the pool via Gosper's hack
    let mut mask: u64 = (1 << m) - 1;
    let last: u64 = mask << (total - m);
    loop {
        let mut sub = Vec::with_capacity(m);
        let mut rest = Vec::with_capacity(total - m);
        for (i, &v) in pooled.iter().enumerate() {
            if mask & (1 << i) != 0 {
                sub.push(v);
            } else {
                rest.push(v);
            }
        }
        let u = u_statistic(&sub, &rest);
        if (u - mn_half).abs() >= dev_obs - 1e-12 {
            hits += 1;
        }
        count += 1;
        if mask == last {
            break;
        }
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    hits as f64 / count as f64
}

/// Two-sided Mann-Whitney U test. Returns (U of `xs`, p-value). Samples with
/// at most 12 elements each are tested by exact permutation; larger samples
/// fall back to the corrected normal approximation.
pub fn mann_whitney_u(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.is_empty() || ys.is_empty() {
        bail!("mann_whitney_u requires non-empty samples");
    }
    let u = u_statistic(xs, ys);
    let p = if xs.len() <= 12 && ys.len() <= 12 {
        exact_p(u, xs, ys)
    } else {
        normal_p(u, xs, ys)
    };
    Ok((u, p))
}

/// Force the normal-approximation p-value regardless of sample size.
pub fn mann_whitney_u_normal(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.is_empty() || ys.is_empty() {
        bail!("mann_whitney_u requires non-empty samples");
    }
    let u = u_statistic(xs, ys);
    Ok((u, normal_p(u, xs, ys)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn a12_identical_singletons_tie() {
        assert_eq!(a12(&[1.0], &[1.0]).unwrap(), 0.5);
    }

    #[test]
    fn a12_fully_separated() {
        assert_eq!(a12(&[4.0, 5.0, 6.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(a12(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap(), 0.0);
    }

    #[test]
    fn a12_complementarity_on_random_samples() {
        let mut rng = rand::rng();
        for _ in 0..50 {
            let xs: Vec<f64> = (0..7).map(|_| rng.random_range(0..5) as f64).collect();
            let ys: Vec<f64> = (0..9).map(|_| rng.random_range(0..5) as f64).collect();
            let fwd = a12(&xs, &ys).unwrap();
            let rev = a12(&ys, &xs).unwrap();
            assert!((fwd + rev - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn a12_invariant_under_monotone_transform() {
        let mut rng = rand::rng();
        for _ in 0..50 {
            let xs: Vec<f64> = (0..6).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
            let ys: Vec<f64> = (0..6).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
            let tx: Vec<f64> = xs.iter().map(|v| v.exp()).collect();
            let ty: Vec<f64> = ys.iter().map(|v| v.exp()).collect();
            assert_eq!(a12(&xs, &ys).unwrap(), a12(&tx, &ty).unwrap());
        }
    }

    #[test]
    fn effect_labels_cover_thresholds() {
        assert_eq!(effect_label(0.95), "large");
        assert_eq!(effect_label(0.05), "large");
        assert_eq!(effect_label(0.68), "medium");
        assert_eq!(effect_label(0.32), "medium");
        assert_eq!(effect_label(0.5), "negligible");
    }

    #[test]
    fn u_complementarity() {
        let mut rng = rand::rng();
        for _ in 0..50 {
            let xs: Vec<f64> = (0..5).map(|_| rng.random_range(0..4) as f64).collect();
            let ys: Vec<f64> = (0..8).map(|_| rng.random_range(0..4) as f64).collect();
            let (ux, _) = mann_whitney_u(&xs, &ys).unwrap();
            let (uy, _) = mann_whitney_u(&ys, &xs).unwrap();
            assert_eq!(ux + uy, (xs.len() * ys.len()) as f64);
        }
    }

    #[test]
    fn u_of_fully_dominated_sample_is_zero() {
        let (u, _) = mann_whitney_u(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(u, 0.0);
    }

    #[test]
    fn identical_samples_give_p_one() {
        let s = [1.0, 2.0, 3.0, 4.0];
        let (_, p) = mann_whitney_u(&s, &s).unwrap();
        assert!(p >= 0.99, "p = {p}");
        let (_, p) = mann_whitney_u_normal(&s, &s).unwrap();
        assert!(p >= 0.99, "p = {p}");
    }

    #[test]
    fn exact_p_matches_hand_case() {
        // xs=(1,2), ys=(3,4): U=0, deviation 2; only U in {0,4} deviates as
        // much; C(4,2)=6 subsets, U=0 once and U=4 once -> p = 2/6
        let (u, p) = mann_whitney_u(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(u, 0.0);
        assert!((p - 2.0 / 6.0).abs() < 1e-12, "p = {p}");
    }

    #[test]
    fn normal_approximation_close_to_exact_at_size_ten() {
        let mut rng = rand::rng();
        for _ in 0..20 {
            let xs: Vec<f64> = (0..10).map(|_| rng.random::<f64>()).collect();
            let ys: Vec<f64> = (0..10).map(|_| rng.random::<f64>() + 0.3).collect();
            let (_, exact) = mann_whitney_u(&xs, &ys).unwrap();
            let (_, approx) = mann_whitney_u_normal(&xs, &ys).unwrap();
            assert!((exact - approx).abs() < 0.05, "exact {exact} vs approx {approx}");
        }
    }
}
