//! Sampling the lower-bound surrogate of the recursive distributional
//! equation
//!
//! V_t = Bin(V_{t-1}^x + 1, rho) + 1{A_t} Bin(V_{t-1}^y, rho),
//!
//! with V^x, V^y independent copies of V_{t-1}, 1{A_t} an independent
//! Bernoulli(pa_lb(t)) and V_0 ~ Bernoulli(rho). This is not the law of V_t:
//! it drops the dependence between A_t and V^x and uses the lower bound for
//! P(A_t). Its mean is exactly ev_lo(t).

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::bounds::pa_table;
use crate::error::{Error, Result};
use crate::rng::{substream, StreamKind};

/// Deepest level the sampler accepts; its cost grows like (1 + pa)^t.
pub const MAX_RDE_DEPTH: u32 = 40;

pub struct RdeSampler {
    rho: f64,
    pa: Vec<f64>,
}

impl RdeSampler {
    pub fn new(t: u32, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::Domain {
                name: "rho",
                value: rho,
                expected: "(0, 1)",
            });
        }
        if t > MAX_RDE_DEPTH {
            return Err(Error::Config(format!("t = {t} exceeds {MAX_RDE_DEPTH}")));
        }
        Ok(Self {
            rho,
            pa: pa_table(t.max(1), rho)?,
        })
    }

    fn binomial<R: Rng>(&self, n: u64, rng: &mut R) -> u64 {
        (0..n).filter(|_| rng.random::<f64>() < self.rho).count() as u64
    }

    pub fn sample<R: Rng>(&self, t: u32, rng: &mut R) -> u64 {
        if t == 0 {
            return u64::from(rng.random::<f64>() < self.rho);
        }
        let vx = self.sample(t - 1, rng);
        let mut v = self.binomial(vx + 1, rng);
        if rng.random::<f64>() < self.pa[t as usize] {
            let vy = self.sample(t - 1, rng);
            v += self.binomial(vy, rng);
        }
        v
    }
}

/// One draw of the surrogate V_t for a trial seed.
pub fn sample_rde_bound(t: u32, rho: f64, trial_seed: u64) -> Result<u64> {
    let sampler = RdeSampler::new(t, rho)?;
    let mut rng: ChaCha8Rng = substream(trial_seed, StreamKind::Recursion);
    Ok(sampler.sample(t, &mut rng))
}
