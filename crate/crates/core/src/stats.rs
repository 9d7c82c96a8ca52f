//! Small summary statistics used by the experiment drivers.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub n: u64,
    pub mean: f64,
    /// Unbiased sample variance (0 for a single sample).
    pub variance: f64,
}

impl Summary {
    pub fn from_values<I>(values: I) -> Self
    where
        I: IntoIterator,
        I::Item: Into<f64>,
    {
        // Welford
        let (mut n, mut mean, mut m2) = (0u64, 0.0f64, 0.0f64);
        for x in values {
            let x = x.into();
            n += 1;
            let delta = x - mean;
            mean += delta / n as f64;
            m2 += delta * (x - mean);
        }
        let variance = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
        Self { n, mean, variance }
    }

    pub fn from_counts(values: &[u64]) -> Self {
        Self::from_values(values.iter().map(|&v| v as f64))
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        (self.variance / self.n as f64).sqrt()
    }

    /// Standard error of the difference of two independent means.
    pub fn pooled_se(&self, other: &Summary) -> f64 {
        (self.std_error().powi(2) + other.std_error().powi(2)).sqrt()
    }
}

/// Standard error of a binomial proportion estimate.
pub fn proportion_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Empirical CDF of integer samples as sorted `(value, P(X <= value))`.
pub fn ecdf(values: &[u64]) -> Vec<(u64, f64)> {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let n = sorted.len() as f64;
    let mut out: Vec<(u64, f64)> = Vec::new();
    for (i, v) in sorted.iter().enumerate() {
        let f = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == *v => last.1 = f,
            _ => out.push((*v, f)),
        }
    }
    out
}

/// `P(X <= c)` under the empirical law of sorted samples.
pub fn ecdf_at(sorted: &[u64], c: u64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    sorted.partition_point(|&v| v <= c) as f64 / sorted.len() as f64
}

/// Two-sample Kolmogorov-Smirnov statistic for integer samples.
pub fn ks_statistic(a: &[u64], b: &[u64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    let mut support: Vec<u64> = a.iter().chain(&b).copied().collect();
    support.sort_unstable();
    support.dedup();
    support
        .iter()
        .map(|&c| (ecdf_at(&a, c) - ecdf_at(&b, c)).abs())
        .fold(0.0, f64::max)
}

/// Asymptotic two-sample KS critical value at level `alpha`.
pub fn ks_critical(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    c * (((n + m) as f64) / (n as f64 * m as f64)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_basics() {
        let s = Summary::from_counts(&[1, 2, 3, 4]);
        assert_eq!(s.n, 4);
        assert!((s.mean - 2.5).abs() < 1e-15);
        assert!((s.variance - 5.0 / 3.0).abs() < 1e-15);
        let one = Summary::from_counts(&[7]);
        assert_eq!((one.mean, one.variance), (7.0, 0.0));
    }

    #[test]
    fn ecdf_steps() {
        let f = ecdf(&[3, 1, 1, 2]);
        assert_eq!(f, vec![(1, 0.5), (2, 0.75), (3, 1.0)]);
        let sorted = [1, 1, 2, 3];
        assert_eq!(ecdf_at(&sorted, 0), 0.0);
        assert_eq!(ecdf_at(&sorted, 2), 0.75);
    }

    #[test]
    fn ks_identical_is_zero() {
        assert_eq!(ks_statistic(&[1, 2, 3], &[3, 2, 1]), 0.0);
        assert!((ks_statistic(&[0, 0], &[1, 1]) - 1.0).abs() < 1e-15);
    }
}
