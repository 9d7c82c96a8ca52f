//! Product lower bound on the probability that a sibling subtree is entered.

use crate::error::{Error, Result};

fn check_rho(rho: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&rho) {
        Ok(rho)
    } else {
        Err(Error::Domain {
            name: "rho",
            value: rho,
            expected: "[0, 1]",
        })
    }
}

/// 1 - prod_{i=0}^{t-1} (1 - rho^i (1 - rho) / 2), for `t >= 1`.
pub fn pa_lower_bound(t: u32, rho: f64) -> Result<f64> {
    if t < 1 {
        return Err(Error::Domain {
            name: "t",
            value: f64::from(t),
            expected: "at least 1",
        });
    }
    let rho = check_rho(rho)?;
    Ok(1.0 - pa_product(t, rho))
}

fn pa_product(t: u32, rho: f64) -> f64 {
    let half_gap = (1.0 - rho) / 2.0;
    let mut power = 1.0;
    let mut prod = 1.0;
    for _ in 0..t {
        prod *= 1.0 - power * half_gap;
        power *= rho;
    }
    prod
}

/// Bounds for t = 1..=t_max, indexed by t (entry 0 holds 0).
pub fn pa_table(t_max: u32, rho: f64) -> Result<Vec<f64>> {
    let rho = check_rho(rho)?;
    let half_gap = (1.0 - rho) / 2.0;
    let mut out = Vec::with_capacity(t_max as usize + 1);
    out.push(0.0);
    let mut power = 1.0;
    let mut prod = 1.0;
    for _ in 0..t_max {
        prod *= 1.0 - power * half_gap;
        power *= rho;
        out.push(1.0 - prod);
    }
    Ok(out)
}

/// The t -> infinity limit of [`pa_lower_bound`].
///
/// Factors differ from 1 by a geometric sequence, so the product converges;
/// terms are added until they no longer change it in binary64.
pub fn pa_limit(rho: f64) -> Result<f64> {
    let rho = check_rho(rho)?;
    if rho == 1.0 {
        return Ok(0.0);
    }
    let half_gap = (1.0 - rho) / 2.0;
    let mut power = 1.0;
    let mut prod = 1.0;
    loop {
        let next = prod * (1.0 - power * half_gap);
        if next == prod {
            return Ok(1.0 - prod);
        }
        prod = next;
        power *= rho;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_factor() {
        assert!((pa_lower_bound(1, 0.5).unwrap() - 0.25).abs() < 1e-15);
        for rho in [0.0, 0.1, 0.7, 1.0] {
            assert!((pa_lower_bound(1, rho).unwrap() - (1.0 - rho) / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_rho() {
        assert_eq!(pa_lower_bound(40, 1.0).unwrap(), 0.0);
        assert_eq!(pa_lower_bound(40, 0.0).unwrap(), 0.5);
        assert_eq!(pa_limit(1.0).unwrap(), 0.0);
    }

    #[test]
    fn domain_errors() {
        assert!(pa_lower_bound(0, 0.5).is_err());
        assert!(pa_lower_bound(3, 1.5).is_err());
        assert!(pa_limit(-0.1).is_err());
    }

    #[test]
    fn table_matches_pointwise() {
        let table = pa_table(60, 0.72).unwrap();
        for t in 1..=60 {
            assert!((table[t as usize] - pa_lower_bound(t, 0.72).unwrap()).abs() < 1e-15);
        }
        assert!(table.windows(2).all(|w| w[0] <= w[1]));
        let lim = pa_limit(0.72).unwrap();
        assert!(lim >= table[60] && lim - table[60] < 1e-6);
    }
}
