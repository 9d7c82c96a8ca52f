//! One-sided empirical test of stochastic dominance between count samples.

use serde::{Deserialize, Serialize};

use crate::stats::ecdf_at;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub pass: bool,
    /// Largest ECDF_large(c) - ECDF_small(c) over all thresholds c.
    pub worst_gap: f64,
    /// Threshold where the worst gap occurs.
    pub worst_at: u64,
    /// Worst gap in units of its standard error (0 where the SE vanishes).
    pub worst_z: f64,
    /// Thresholds where the gap exceeded `margin` standard errors.
    pub flagged: Vec<u64>,
}

/// Checks that `large` plausibly dominates `small`: flags every threshold c
/// where ECDF_large(c) > ECDF_small(c) + margin * SE(c).
///
/// Empty samples cannot witness a violation and pass vacuously.
pub fn check_dominance(small: &[u64], large: &[u64], margin: f64) -> DominanceReport {
    let mut a = small.to_vec();
    let mut b = large.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    let mut report = DominanceReport {
        pass: true,
        worst_gap: f64::NEG_INFINITY,
        worst_at: 0,
        worst_z: 0.0,
        flagged: Vec::new(),
    };
    if a.is_empty() || b.is_empty() {
        report.worst_gap = 0.0;
        return report;
    }
    let (ns, nl) = (a.len() as f64, b.len() as f64);
    let mut thresholds: Vec<u64> = a.iter().chain(&b).copied().collect();
    thresholds.sort_unstable();
    thresholds.dedup();
    for c in thresholds {
        let fs = ecdf_at(&a, c);
        let fl = ecdf_at(&b, c);
        let gap = fl - fs;
        let se = (fs * (1.0 - fs) / ns + fl * (1.0 - fl) / nl).sqrt();
        if gap > report.worst_gap {
            report.worst_gap = gap;
            report.worst_at = c;
            report.worst_z = if se > 0.0 { gap / se } else { 0.0 };
        }
        if gap > margin * se && gap > 0.0 {
            report.flagged.push(c);
        }
    }
    report.pass = report.flagged.is_empty();
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_pass() {
        let xs = [0, 1, 1, 2, 5, 3, 0];
        let r = check_dominance(&xs, &xs, 3.0);
        assert!(r.pass);
        assert!(r.worst_gap <= 0.0);
    }

    #[test]
    fn shifted_samples_pass() {
        let xs: Vec<u64> = (0..500).map(|i| i % 17).collect();
        let ys: Vec<u64> = xs.iter().map(|x| x + 1).collect();
        assert!(check_dominance(&xs, &ys, 3.0).pass);
    }

    #[test]
    fn reversed_shift_fails() {
        let xs: Vec<u64> = (0..500).map(|i| i % 17).collect();
        let ys: Vec<u64> = xs.iter().map(|x| x + 1).collect();
        let r = check_dominance(&ys, &xs, 3.0);
        assert!(!r.pass);
        assert!(r.worst_gap > 0.0);
    }
}
