//! Smallest rho at which the first-moment growth factor exceeds one.

use serde::{Deserialize, Serialize};

use super::pa::pa_lower_bound;
use crate::error::{Error, Result};
use crate::model::p_of_rho;

const SCAN_STEP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    #[serde(rename = "T")]
    pub t: u32,
    pub rho_star: f64,
    pub p_star: f64,
    pub tol: f64,
    /// Final bisection bracket: growth factor <= 1 at the left end, > 1 at
    /// the right end.
    pub bracket: (f64, f64),
    /// Sign changes seen by the coarse scan.
    pub crossings: usize,
}

/// rho (1 + pa_lower_bound(t, rho)).
pub fn growth_factor(t: u32, rho: f64) -> Result<f64> {
    Ok(rho * (1.0 + pa_lower_bound(t, rho)?))
}

/// Smallest rho in (0,1) with growth factor above one, or `None` when the
/// coarse scan finds no crossing.
pub fn critical_rho(t: u32, tol: f64) -> Result<Option<ThresholdResult>> {
    if t < 1 {
        return Err(Error::Domain {
            name: "T",
            value: f64::from(t),
            expected: "at least 1",
        });
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain {
            name: "tol",
            value: tol,
            expected: "positive",
        });
    }
    let above = |rho: f64| growth_factor(t, rho).map(|g| g > 1.0);
    let steps = (1.0 / SCAN_STEP).round() as u32;
    let mut crossings = 0;
    let mut first: Option<(f64, f64)> = None;
    let mut prev_rho = 0.0;
    let mut prev_above = false;
    for i in 1..steps {
        let rho = f64::from(i) * SCAN_STEP;
        let now = above(rho)?;
        if now != prev_above {
            crossings += 1;
            if now && first.is_none() {
                first = Some((prev_rho, rho));
            }
        }
        prev_rho = rho;
        prev_above = now;
    }
    let Some((mut lo, mut hi)) = first else {
        return Ok(None);
    };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if above(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let rho_star = 0.5 * (lo + hi);
    Ok(Some(ThresholdResult {
        t,
        rho_star,
        p_star: p_of_rho(rho_star)?,
        tol,
        bracket: (lo, hi),
        crossings,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_factor_has_no_crossing() {
        assert_eq!(critical_rho(1, 1e-6).unwrap(), None);
    }

    #[test]
    fn bracket_straddles_one() {
        let r = critical_rho(20, 1e-8).unwrap().unwrap();
        assert!(growth_factor(20, r.bracket.0).unwrap() <= 1.0);
        assert!(growth_factor(20, r.bracket.1).unwrap() > 1.0);
        assert!(r.bracket.1 - r.bracket.0 <= 1e-8);
        assert_eq!(r.crossings, 1);
    }

    #[test]
    fn bad_arguments() {
        assert!(critical_rho(0, 1e-3).is_err());
        assert!(critical_rho(5, 0.0).is_err());
        assert!(critical_rho(5, f64::NAN).is_err());
    }
}
