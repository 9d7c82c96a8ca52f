//! Heuristic recurrence diagnostic: do truncated root-visit means keep
//! growing as the depth cap increases?
//!
//! No finite truncation decides recurrence. Verdicts are labelled as
//! heuristics and only say what the data are consistent with.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::sim::{estimate_root_visits, Model, SimConfig};

/// Minimum ratio of consecutive means counted as growth.
pub const GROWTH_RATIO: f64 = 1.05;
/// The increase must also exceed this many standard errors.
pub const GROWTH_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub model: Model,
    pub d: u32,
    pub p_grid: Vec<f64>,
    pub depth_grid: Vec<u32>,
    pub trials: u64,
    pub seed: u64,
    pub step_cap: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub p: f64,
    pub depth_cap: u32,
    pub trials: u64,
    pub mean: f64,
    pub std_error: f64,
    pub step_capped: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepVerdict {
    pub p: f64,
    /// Means still grow between the two deepest caps.
    pub growth: bool,
    pub last_ratio: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub cells: Vec<SweepCell>,
    pub verdicts: Vec<SweepVerdict>,
    /// Growth flags never switch off as p increases along the grid.
    pub monotone: bool,
}

pub const GROWTH_LABEL: &str = "consistent with recurrence (heuristic: means grow with depth)";
pub const SATURATION_LABEL: &str = "consistent with transience (heuristic: means saturate)";

/// Growth test between two consecutive cells.
pub fn grows(shallow: &SweepCell, deep: &SweepCell) -> (bool, f64) {
    let ratio = if shallow.mean > 0.0 {
        deep.mean / shallow.mean
    } else if deep.mean > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };
    let se = shallow.std_error.hypot(deep.std_error);
    let growth = ratio >= GROWTH_RATIO && deep.mean - shallow.mean > GROWTH_SIGMAS * se;
    (growth, ratio)
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport> {
    if config.p_grid.is_empty() || config.depth_grid.len() < 2 {
        return Err(Error::Config("a sweep needs at least one p and two depth caps".into()));
    }
    if config.depth_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("depth caps must increase".into()));
    }
    let mut p_sorted = config.p_grid.clone();
    p_sorted.sort_by(f64::total_cmp);
    let mut cells = Vec::new();
    let mut verdicts = Vec::new();
    for &p in &p_sorted {
        let params = ModelParams::new(config.d, p)?;
        let row: Vec<SweepCell> = config
            .depth_grid
            .iter()
            .map(|&depth| {
                let sim = SimConfig::new(params, depth, config.step_cap);
                let est = estimate_root_visits(config.model, &sim, config.trials, config.seed)?;
                Ok(SweepCell {
                    p,
                    depth_cap: depth,
                    trials: config.trials,
                    mean: est.summary.mean,
                    std_error: est.std_error,
                    step_capped: est.step_capped,
                })
            })
            .collect::<Result<_>>()?;
        let (growth, last_ratio) = grows(&row[row.len() - 2], &row[row.len() - 1]);
        verdicts.push(SweepVerdict {
            p,
            growth,
            last_ratio,
            label: if growth { GROWTH_LABEL } else { SATURATION_LABEL }.to_owned(),
        });
        cells.extend(row);
    }
    let monotone = verdicts.windows(2).all(|w| !w[0].growth || w[1].growth);
    Ok(SweepReport {
        cells,
        verdicts,
        monotone,
    })
}
