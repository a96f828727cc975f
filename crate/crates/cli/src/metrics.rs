//! Campaign metrics: sub-specification violation coverage and falsification
//! success rate.

/// Percentage of sub-specifications that at least one violation's real-trace
/// robustness vector falsifies.
pub fn coverage(all_robustness: &[Vec<f64>], n_subspecs: usize) -> f64 {
    assert!(n_subspecs >= 1);
    let covered = (0..n_subspecs)
        .filter(|&i| all_robustness.iter().any(|v| v[i] < 0.0))
        .count();
    covered as f64 / n_subspecs as f64 * 100.0
}

/// Ratio of genuine-violation trials to total trials.
pub fn success_rate(genuine_trials: usize, total_trials: usize) -> f64 {
    assert!(total_trials >= 1);
    genuine_trials as f64 / total_trials as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coverage_counts_distinct_negative_indices() {
        let records = vec![vec![0.1, -0.2, -0.3, 0.4], vec![0.1, -0.1, 0.2, 0.3]];
        assert_eq!(coverage(&records, 4), 50.0);
    }

    #[test]
    fn coverage_empty_and_full() {
        assert_eq!(coverage(&[], 4), 0.0);
        let full = vec![vec![-1.0, -1.0, -1.0]];
        assert_eq!(coverage(&full, 3), 100.0);
    }

    #[test]
    fn coverage_is_monotone_in_violations() {
        let mut records: Vec<Vec<f64>> = Vec::new();
        let additions =
            [vec![-0.1, 0.2, 0.3], vec![0.1, 0.2, 0.3], vec![0.1, -0.2, 0.3], vec![-0.5, 0.1, -0.1]];
        let mut last = 0.0;
        for add in additions {
            records.push(add);
            let c = coverage(&records, 3);
            assert!(c >= last);
            last = c;
        }
        assert_eq!(last, 100.0);
    }

    #[test]
    fn success_rate_endpoints() {
        assert_eq!(success_rate(0, 50), 0.0);
        assert_eq!(success_rate(50, 50), 1.0);
        assert_eq!(success_rate(21, 50), 0.42);
    }
}
