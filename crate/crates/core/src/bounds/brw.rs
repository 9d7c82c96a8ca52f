//! Growth rate of the branching random walk that dominates FM(2,p): one
//! particle per up-step, two per down-step.

use crate::error::{Error, Result};

/// (2 - sqrt 2) / 4: the drift at which the minimal growth rate is one.
pub fn q_star() -> f64 {
    (2.0 - std::f64::consts::SQRT_2) / 4.0
}

fn check_open(p: f64) -> Result<f64> {
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err(Error::Domain {
            name: "p",
            value: p,
            expected: "(0, 1)",
        })
    }
}

/// p e^theta + 2 (1 - p) e^-theta.
pub fn brw_growth(p: f64, theta: f64) -> f64 {
    p * theta.exp() + 2.0 * (1.0 - p) * (-theta).exp()
}

/// Minimising theta, ln(2(1-p)/p) / 2.
pub fn brw_argmin(p: f64) -> Result<f64> {
    let p = check_open(p)?;
    Ok(0.5 * (2.0 * (1.0 - p) / p).ln())
}

/// min over theta of [`brw_growth`], which is 2 sqrt(2 p (1 - p)).
pub fn brw_min_growth(p: f64) -> Result<f64> {
    let p = check_open(p)?;
    Ok(2.0 * (2.0 * p * (1.0 - p)).sqrt())
}
