//! Rigorous recursions for the first two moments of the truncated root
//! visit count V_t, driven by the product bound on P(A).
//!
//! With m = E V_t, s = E V_t^2 and a = P(A_{t+1}):
//!
//! * E V_{t+1} = rho (1 + a) m + rho,
//! * E V_{t+1}^2 <= rho^2 (1 + a) s + 2 rho^2 m^2 + c(a) m + rho, where
//!   c(a) = rho (1 - rho)(1 + a) + 4 rho^2.
//!
//! Lower bounds use a >= pa_lb(t+1); upper bounds use a <= 1. Dividing the
//! second by the square of the first gives the ratio recursion for
//! x_t = E V_t^2 / (E V_t)^2, every term of which decreases in a and in m,
//! so substituting pa_lb and ev_lo keeps it an upper bound.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::pa::{pa_limit, pa_table};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MomentBase {
    /// V_0 = 0.
    Zero,
    /// V_0 ~ Bernoulli(rho).
    #[default]
    Bernoulli,
}

impl fmt::Display for MomentBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MomentBase::Zero => "ZERO",
            MomentBase::Bernoulli => "BERNOULLI",
        })
    }
}

impl FromStr for MomentBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero" => Ok(Self::Zero),
            "bernoulli" => Ok(Self::Bernoulli),
            _ => Err(Error::Parse {
                what: "moment base",
                input: s.to_owned(),
            }),
        }
    }
}

/// All sequences are indexed by t = 0..=T.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSequences {
    pub rho: f64,
    pub base: MomentBase,
    /// pa_lb[t] bounds P(A_t) from below; pa_lb[0] = 0.
    pub pa_lb: Vec<f64>,
    pub ev_lo: Vec<f64>,
    pub ev_hi: Vec<f64>,
    pub ev2_hi: Vec<f64>,
    /// `None` while ev_lo is still zero.
    pub x_hi: Vec<Option<f64>>,
    pub pz_lb: Vec<Option<f64>>,
}

/// One line of the per-t table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub t: u32,
    pub pa_lb: f64,
    pub ev_lo: f64,
    pub ev_hi: f64,
    pub ev2_hi: f64,
    pub x_hi: Option<f64>,
    pub pz_lb: Option<f64>,
}

impl MomentSequences {
    pub fn horizon(&self) -> u32 {
        (self.ev_lo.len() - 1) as u32
    }

    pub fn rows(&self) -> Vec<MomentRow> {
        (0..self.ev_lo.len())
            .map(|t| MomentRow {
                t: t as u32,
                pa_lb: self.pa_lb[t],
                ev_lo: self.ev_lo[t],
                ev_hi: self.ev_hi[t],
                ev2_hi: self.ev2_hi[t],
                x_hi: self.x_hi[t],
                pz_lb: self.pz_lb[t],
            })
            .collect()
    }

    /// First t with ev_lo(t) > `level`.
    pub fn first_exceeding(&self, level: f64) -> Option<u32> {
        self.ev_lo.iter().position(|&m| m > level).map(|t| t as u32)
    }
}

pub fn compute_moment_sequences(rho: f64, horizon: u32, base: MomentBase) -> Result<MomentSequences> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain {
            name: "rho",
            value: rho,
            expected: "(0, 1)",
        });
    }
    if horizon < 1 {
        return Err(Error::Domain {
            name: "T",
            value: f64::from(horizon),
            expected: "at least 1",
        });
    }
    let pa_lb = pa_table(horizon, rho)?;
    let n = horizon as usize + 1;
    let (mut ev_lo, mut ev_hi, mut ev2_hi) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    let mut x_hi: Vec<Option<f64>> = Vec::with_capacity(n);
    let (m0, x0) = match base {
        MomentBase::Zero => (0.0, None),
        MomentBase::Bernoulli => (rho, Some(1.0 / rho)),
    };
    ev_lo.push(m0);
    ev_hi.push(m0);
    ev2_hi.push(m0);
    x_hi.push(x0);

    let r2 = rho * rho;
    for t in 0..horizon as usize {
        let a = pa_lb[t + 1];
        let (m, mh, sh) = (ev_lo[t], ev_hi[t], ev2_hi[t]);
        ev_lo.push(rho * (1.0 + a) * m + rho);
        ev_hi.push(2.0 * rho * mh + rho);
        ev2_hi.push(2.0 * r2 * sh + 2.0 * r2 * mh * mh + 2.0 * rho * (1.0 + rho) * mh + rho);
        let x_next = match x_hi[t] {
            Some(x) => {
                let one_a = 1.0 + a;
                let c = rho * (1.0 - rho) * one_a + 4.0 * r2;
                x / one_a + 2.0 / (one_a * one_a) + c / (one_a * one_a * r2 * m) + 1.0 / (rho * one_a * one_a * m * m)
            }
            None => ev2_hi[t + 1] / (ev_lo[t + 1] * ev_lo[t + 1]),
        };
        x_hi.push(Some(x_next.max(1.0)));
    }
    let pz_lb = x_hi.iter().map(|x| x.map(|x| 1.0 / (4.0 * x))).collect();
    Ok(MomentSequences {
        rho,
        base,
        pa_lb,
        ev_lo,
        ev_hi,
        ev2_hi,
        x_hi,
        pz_lb,
    })
}

/// Where a sequence settles: increments stay below `eps` from `from` on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stabilization {
    pub from: u32,
    pub sup: f64,
    pub sup_at: u32,
}

/// Stabilization of the defined part of `xs`, or `None` if the last
/// increment is still at least `eps`.
pub fn stabilization(xs: &[Option<f64>], eps: f64) -> Option<Stabilization> {
    let defined: Vec<(usize, f64)> = xs.iter().enumerate().filter_map(|(t, x)| x.map(|x| (t, x))).collect();
    if defined.len() < 2 {
        return None;
    }
    let mut from = defined.len() - 1;
    while from > 0 && (defined[from].1 - defined[from - 1].1).abs() < eps {
        from -= 1;
    }
    if from == defined.len() - 1 {
        return None;
    }
    let (sup_at, sup) = defined.iter().copied().fold(
        (0, f64::NEG_INFINITY),
        |best, (t, x)| if x > best.1 { (t, x) } else { best },
    );
    Some(Stabilization {
        from: defined[from].0 as u32,
        sup,
        sup_at: sup_at as u32,
    })
}

/// Limit of ev_lo when the limiting growth factor rho (1 + P_inf) is below
/// one: rho / (1 - rho (1 + P_inf)).
pub fn ev_fixed_point(rho: f64) -> Result<Option<f64>> {
    let growth = rho * (1.0 + pa_limit(rho)?);
    Ok((growth < 1.0).then(|| rho / (1.0 - growth)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_base() {
        let m = compute_moment_sequences(0.6, 3, MomentBase::Bernoulli).unwrap();
        assert_eq!(m.ev_lo[0], 0.6);
        assert_eq!(m.ev2_hi[0], 0.6);
        assert!((m.x_hi[0].unwrap() - 1.0 / 0.6).abs() < 1e-15);
        assert!((m.pz_lb[0].unwrap() - 0.6 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn zero_base_defines_x_from_t1() {
        let m = compute_moment_sequences(0.6, 4, MomentBase::Zero).unwrap();
        assert_eq!(m.x_hi[0], None);
        assert_eq!(m.ev_lo[1], 0.6);
        assert!(m.x_hi[1..].iter().all(|x| x.is_some_and(|x| x >= 1.0)));
    }

    #[test]
    fn orderings_hold() {
        for rho in [0.3, 0.5, 0.72, 0.9] {
            let m = compute_moment_sequences(rho, 100, MomentBase::Bernoulli).unwrap();
            for t in 0..=100 {
                assert!(m.ev_lo[t] <= m.ev_hi[t]);
                assert!(m.ev_hi[t] * m.ev_hi[t] <= m.ev2_hi[t] + 1e-9 * m.ev2_hi[t]);
                let pz = m.pz_lb[t].unwrap();
                assert!(pz > 0.0 && pz <= 0.25);
            }
        }
    }

    #[test]
    fn stabilization_detection() {
        let xs: Vec<Option<f64>> = (0..50).map(|t| Some(2.0 - 0.5f64.powi(t))).collect();
        let s = stabilization(&xs, 1e-9).unwrap();
        assert!(s.from > 25 && s.from < 40);
        assert_eq!(s.sup_at, 49);
        let growing: Vec<Option<f64>> = (0..50).map(|t| Some(f64::from(t))).collect();
        assert_eq!(stabilization(&growing, 1e-9), None);
    }

    #[test]
    fn domain() {
        assert!(compute_moment_sequences(1.0, 5, MomentBase::Zero).is_err());
        assert!(compute_moment_sequences(0.5, 0, MomentBase::Zero).is_err());
        assert_eq!("bernoulli".parse::<MomentBase>().unwrap(), MomentBase::Bernoulli);
    }
}
