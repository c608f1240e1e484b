//! Order-fixed reductions and Monte Carlo summaries.
//!
//! Every reduction runs over values collected in path-index order, so the
//! result does not depend on how the work was scheduled.

use serde::Serialize;

/// Pairwise (cascade) summation over a fixed order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

impl MeanEstimate {
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                std_error: f64::NAN,
                count: 0,
            };
        }
        let mean = pairwise_sum(values) / n as f64;
        if n == 1 {
            return Self {
                mean,
                std_error: 0.0,
                count: 1,
            };
        }
        let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        let var = pairwise_sum(&dev) / (n - 1) as f64;
        Self {
            mean,
            std_error: (var / n as f64).sqrt(),
            count: n,
        }
    }
}

/// `(E|Y|^p)^(1/p)` from samples of `|Y|`, with a delta-method error.
///
/// A sample of identical values returns that value exactly with zero error.
pub fn lp_norm_estimate(abs_values: &[f64], p: f64) -> (f64, f64) {
    if let Some(&first) = abs_values.first() {
        if abs_values.iter().all(|&v| v == first) {
            return (first, 0.0);
        }
    }
    let powers: Vec<f64> = abs_values.iter().map(|v| v.powf(p)).collect();
    let m = MeanEstimate::from_samples(&powers);
    let norm = m.mean.max(0.0).powf(1.0 / p);
    let se = if m.mean > 0.0 {
        m.std_error * m.mean.powf(1.0 / p - 1.0) / p
    } else {
        0.0
    };
    (norm, se)
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn mean_estimate_of_two_point_sample() {
        let m = MeanEstimate::from_samples(&[1.0, -1.0, 1.0, -1.0]);
        assert_eq!(m.mean, 0.0);
        assert!((m.std_error - (4.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn lp_norm_of_constant() {
        let (n, se) = lp_norm_estimate(&[0.3; 10], 3.0);
        assert_eq!(n, 0.3);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(0, 100, 1.96);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
        let (lo, hi) = wilson_interval(50, 100, 1.96);
        assert!(lo < 0.5 && hi > 0.5);
    }
}
