//! Configuration and outcome types shared by the simulators, plus the
//! multi-trial driver.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelParams, Vertex};
use crate::runner::run_trials;
use crate::schedule::SchedulePolicy;
use crate::stats::{ecdf, Summary};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: ModelParams,
    /// Sites deeper than this do not exist; a frog stepping past it is removed.
    pub depth_cap: u32,
    pub step_cap: u64,
    pub policy: SchedulePolicy,
    /// Sleepers occupy depths `1..=sleeper_depth`; `None` means up to `depth_cap`.
    pub sleeper_depth: Option<u32>,
    pub record_sites: bool,
}

impl SimConfig {
    pub fn new(params: ModelParams, depth_cap: u32, step_cap: u64) -> Self {
        Self {
            params,
            depth_cap,
            step_cap,
            policy: SchedulePolicy::UniformRandom,
            sleeper_depth: None,
            record_sites: false,
        }
    }

    pub fn with_policy(mut self, policy: SchedulePolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_sleeper_depth(mut self, depth: u32) -> Self {
        self.sleeper_depth = Some(depth);
        self
    }

    pub fn recording_sites(mut self) -> Self {
        self.record_sites = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.step_cap == 0 {
            return Err(Error::Config("step_cap must be at least 1".into()));
        }
        if let Some(t) = self.sleeper_depth {
            if t > self.depth_cap {
                return Err(Error::Config(format!(
                    "sleeper depth {t} exceeds depth cap {}",
                    self.depth_cap
                )));
            }
        }
        if self.depth_cap > u32::from(u16::MAX) {
            return Err(Error::Config("depth cap too large".into()));
        }
        Ok(())
    }

    /// Deepest level holding sleepers.
    pub fn sleeper_limit(&self) -> u32 {
        self.sleeper_depth.unwrap_or(self.depth_cap).min(self.depth_cap)
    }

    /// Number of sleepers placed at time 0 (saturating).
    pub fn initial_sleepers(&self) -> u128 {
        let d = u128::from(self.params.d());
        let mut level = 1u128;
        let mut total = 0u128;
        for _ in 0..self.sleeper_limit() {
            level = level.saturating_mul(d);
            total = total.saturating_add(level);
        }
        total
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Truncation {
    /// Stopped by the step cap with frogs still awake.
    StepCap,
    /// Every frog was removed, at least one of them at the depth cap.
    DepthExtinct,
    /// Every frog was removed by the model's own rules.
    AllRemoved,
}

impl fmt::Display for Truncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Truncation::StepCap => "STEP_CAP",
            Truncation::DepthExtinct => "DEPTH_EXTINCT",
            Truncation::AllRemoved => "ALL_REMOVED",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum KillReason {
    HitRoot,
    HitVisited,
    EarlyRemoval,
    DepthCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct KillHistogram {
    pub hit_root: u64,
    pub hit_visited: u64,
    pub early: u64,
    pub cap: u64,
}

impl KillHistogram {
    pub fn record(&mut self, reason: KillReason) {
        match reason {
            KillReason::HitRoot => self.hit_root += 1,
            KillReason::HitVisited => self.hit_visited += 1,
            KillReason::EarlyRemoval => self.early += 1,
            KillReason::DepthCap => self.cap += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.hit_root + self.hit_visited + self.early + self.cap
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub root_visits: u64,
    pub frogs_woken: u64,
    pub steps_used: u64,
    pub truncation: Truncation,
    pub kills: KillHistogram,
    /// Arrivals per site (only sites with at least one arrival).
    pub per_site_visits: Option<BTreeMap<Vertex, u64>>,
}

impl TrialOutcome {
    pub(crate) fn classify(step_capped: bool, kills: &KillHistogram) -> Truncation {
        if step_capped {
            Truncation::StepCap
        } else if kills.cap > 0 {
            Truncation::DepthExtinct
        } else {
            Truncation::AllRemoved
        }
    }
}

/// Which process a batch of trials simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Fm,
    FmPrime,
    Rfm,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Fm => "fm",
            Model::FmPrime => "fmprime",
            Model::Rfm => "rfm",
        })
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fm" => Ok(Model::Fm),
            "fmprime" | "fm'" | "fm-prime" => Ok(Model::FmPrime),
            "rfm" => Ok(Model::Rfm),
            _ => Err(Error::Parse {
                what: "model",
                input: s.to_owned(),
            }),
        }
    }
}

/// One trial with the default (no early removal) rules of `model`.
pub fn simulate(model: Model, config: &SimConfig, trial_seed: u64) -> Result<TrialOutcome> {
    match model {
        Model::Fm => crate::fm::run_fm(config, trial_seed),
        Model::FmPrime => crate::fm::run_fm_prime(config, trial_seed),
        Model::Rfm => crate::rfm::run_rfm(config, &crate::rfm::EarlyRemovalPolicy::None, trial_seed),
    }
}

/// Per-trial CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial_id: u64,
    pub d: u32,
    pub p: f64,
    pub depth_cap: u32,
    pub step_cap: u64,
    pub root_visits: u64,
    pub frogs_woken: u64,
    pub steps_used: u64,
    pub truncation: Truncation,
}

impl TrialRow {
    pub fn new(trial_id: u64, config: &SimConfig, outcome: &TrialOutcome) -> Self {
        Self {
            trial_id,
            d: config.params.d(),
            p: config.params.p(),
            depth_cap: config.depth_cap,
            step_cap: config.step_cap,
            root_visits: outcome.root_visits,
            frogs_woken: outcome.frogs_woken,
            steps_used: outcome.steps_used,
            truncation: outcome.truncation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootVisitEstimate {
    pub summary: Summary,
    pub std_error: f64,
    /// `(value, P(V <= value))` over the observed support.
    pub ecdf: Vec<(u64, f64)>,
    pub step_capped: u64,
    pub rows: Vec<TrialRow>,
}

impl RootVisitEstimate {
    pub fn from_outcomes(config: &SimConfig, outcomes: &[TrialOutcome]) -> Self {
        let visits: Vec<u64> = outcomes.iter().map(|o| o.root_visits).collect();
        let summary = Summary::from_counts(&visits);
        Self {
            summary,
            std_error: summary.std_error(),
            ecdf: ecdf(&visits),
            step_capped: outcomes.iter().filter(|o| o.truncation == Truncation::StepCap).count() as u64,
            rows: outcomes
                .iter()
                .enumerate()
                .map(|(i, o)| TrialRow::new(i as u64, config, o))
                .collect(),
        }
    }
}

/// Runs `trials` independently seeded trials in parallel and merges them in
/// trial order.
pub fn estimate_root_visits(
    model: Model,
    config: &SimConfig,
    trials: u64,
    master_seed: u64,
) -> Result<RootVisitEstimate> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    config.validate()?;
    let outcomes = run_trials(trials, master_seed, |_, seed| simulate(model, config, seed))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(RootVisitEstimate::from_outcomes(config, &outcomes))
}
