//! Trial-level parallelism.
//!
//! Trial `i` always receives `trial_seed(master, i)` and results come back in
//! trial order, so the merged output does not depend on how rayon splits the
//! work (or on whether it runs at all).

use rayon::prelude::*;

use crate::rng::trial_seed;

pub fn run_trials<T, F>(trials: u64, master_seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, u64) -> T + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|i| f(i, trial_seed(master_seed, i)))
        .collect()
}

pub fn run_trials_serial<T, F>(trials: u64, master_seed: u64, f: F) -> Vec<T>
where
    F: Fn(u64, u64) -> T,
{
    (0..trials).map(|i| f(i, trial_seed(master_seed, i))).collect()
}
