//! Wilson score interval for binomial proportions. Chosen over the normal
//! approximation because the use here is exactly the regime where the latter
//! breaks: tail probabilities near 0 and 1.

/// 97.5% standard normal quantile, for two-sided 95% coverage.
const Z95: f64 = 1.959_963_984_540_054;

/// Returns `(lo, hi)` covering the true proportion with ~95% confidence.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    wilson_interval_z(successes, trials, Z95)
}

pub fn wilson_interval_z(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(successes <= trials && trials > 0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_contains_the_point_estimate() {
        for (k, n) in [(0u64, 100u64), (1, 100), (50, 100), (99, 100), (100, 100)] {
            let (lo, hi) = wilson_interval(k, n);
            let p = k as f64 / n as f64;
            assert!(lo <= p + 1e-12 && p <= hi + 1e-12, "k={k} n={n}");
            assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        }
    }

    #[test]
    fn zero_successes_matches_rule_of_three() {
        let (_, hi) = wilson_interval(0, 1000);
        assert!(hi < 5.0 / 1000.0, "hi = {hi}");
        assert!(hi > 1.0 / 1000.0);
    }

    #[test]
    fn width_shrinks_like_inverse_sqrt() {
        let (lo1, hi1) = wilson_interval(500, 1000);
        let (lo2, hi2) = wilson_interval(50_000, 100_000);
        let ratio = (hi1 - lo1) / (hi2 - lo2);
        assert!((ratio - 10.0).abs() < 0.5, "ratio = {ratio}");
    }
}
