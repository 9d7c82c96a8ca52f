//! Fixtures shared by the benchmarks.

use frogtree_core::{ModelParams, SimConfig};

/// Default step cap for benchmarked trials.
pub const STEP_CAP: u64 = 10_000_000;

pub fn config(d: u32, p: f64, depth: u32) -> SimConfig {
    SimConfig::new(ModelParams::new(d, p).expect("valid drift"), depth, STEP_CAP)
}
