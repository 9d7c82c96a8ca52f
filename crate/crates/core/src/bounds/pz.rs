//! Monte Carlo check of the Paley–Zygmund bound on P(V_t > E V_t / 2).

use serde::{Deserialize, Serialize};

use super::moments::{compute_moment_sequences, MomentBase};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::rfm::sample_vt;
use crate::runner::run_trials;
use crate::stats::proportion_se;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PzReport {
    pub t: u32,
    pub rho: f64,
    pub trials: u64,
    pub mean: f64,
    /// Fraction of samples above half the sample mean.
    pub prob: f64,
    pub se: f64,
    pub bound: f64,
    pub pass: bool,
    /// Trials stopped by the step cap.
    pub step_capped: u64,
}

/// Samples V_t of RFM(2,p) with rho = p/(1-p) and compares the fraction
/// exceeding half the empirical mean with 1/(4 x_hi(t)) - 3 sigma.
pub fn pz_empirical_check(t: u32, rho: f64, trials: u64, seed: u64, step_cap: u64) -> Result<PzReport> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let params = ModelParams::from_rho(2, rho)?;
    let moments = compute_moment_sequences(rho, t.max(1), MomentBase::Bernoulli)?;
    let bound = moments.pz_lb[t as usize].expect("defined under a Bernoulli base");
    let samples = run_trials(trials, seed, |_, s| sample_vt(t, params, step_cap, s))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let step_capped = samples
        .iter()
        .filter(|s| s.truncation == crate::sim::Truncation::StepCap)
        .count() as u64;
    let mean = samples.iter().map(|s| s.v as f64).sum::<f64>() / trials as f64;
    let above = samples.iter().filter(|s| s.v as f64 > mean / 2.0).count();
    let prob = above as f64 / trials as f64;
    let se = proportion_se(prob, trials);
    Ok(PzReport {
        t,
        rho,
        trials,
        mean,
        prob,
        se,
        bound,
        pass: prob >= bound - 3.0 * se,
        step_capped,
    })
}
