use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::Result;
use frogtree_core::coupling::{
    effective_extra_kill, run_coupled_fm, run_coupled_rfm, CheckMode, ExtraKillStats, InvariantLog, Violation,
};
use frogtree_core::rng::trial_seed;
use frogtree_core::runner::run_trials;
use frogtree_core::sim::{SimConfig, TrialOutcome};
use frogtree_core::ModelParams;
use serde::Serialize;

use super::DEFAULT_SEED;
use crate::config::FileConfig;
use crate::exit::{InvariantError, UsageError};
use crate::output::{write_json, CsvOut, Header};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    FmKd,
    RfmPlus1,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::FmKd => "fm-kd",
            Kind::RfmPlus1 => "rfm-plus1",
        })
    }
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "fm-kd" => Ok(Kind::FmKd),
            "rfm-plus1" | "rfm+1" => Ok(Kind::RfmPlus1),
            _ => Err(format!("unknown coupling {s:?} (expected fm-kd or rfm-plus1)")),
        }
    }
}

#[derive(clap::Args, Debug)]
pub struct Args {
    /// fm-kd or rfm-plus1.
    #[arg(long)]
    kind: Option<Kind>,
    #[arg(long)]
    d: Option<u32>,
    /// Block size of the kd-ary embedding (fm-kd only).
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    depth: Option<u32>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// on, off or full.
    #[arg(long)]
    check_invariants: Option<CheckMode>,
    /// Per-trial CSV (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON summary with the first violation, if any.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Serialize)]
struct Row {
    trial_id: u64,
    pair: String,
    violations: u64,
    checks: u64,
    small_root_visits: u64,
    large_root_visits: u64,
    /// Both sides produced the same outcome, site visits included.
    identical: bool,
    aborted: bool,
}

#[derive(Serialize)]
struct Failure {
    trial_id: u64,
    trial_seed: u64,
    violation: Option<Violation>,
}

#[derive(Serialize)]
struct ExtraKillRow {
    s_prime: usize,
    down_steps: u64,
    extra_kills: u64,
    frequency: Option<f64>,
    expected: f64,
    z: Option<f64>,
}

#[derive(Serialize)]
struct Report {
    kind: String,
    pair: String,
    trials: u64,
    violations: u64,
    checks: BTreeMap<String, u64>,
    first_failure: Option<Failure>,
    extra_kill: Option<Vec<ExtraKillRow>>,
}

struct Trial {
    small: TrialOutcome,
    large: TrialOutcome,
    log: InvariantLog,
    aborted: bool,
    extra: Option<ExtraKillStats>,
}

pub fn run(args: Args, file: &mut FileConfig) -> Result<()> {
    let kind = file.resolve("kind", args.kind, Kind::FmKd)?;
    let d = file.resolve("d", args.d, 2)?;
    let k = file.resolve("k", args.k, 2)?;
    let p = file.resolve("p", args.p, 0.3)?;
    let depth = file.resolve("depth", args.depth, 10)?;
    let steps = file.resolve("steps", args.steps, 1_000_000)?;
    let trials = file.resolve("trials", args.trials, 100)?;
    let seed = file.resolve("seed", args.seed, DEFAULT_SEED)?;
    let mode = file.resolve("check_invariants", args.check_invariants, CheckMode::Incremental)?;
    let out = file.resolve_opt("out", args.out)?;
    let report_path = file.resolve_opt("report", args.report)?;
    std::mem::take(file).finish()?;
    if trials == 0 {
        return Err(UsageError("--trials must be at least 1".into()).into());
    }

    let mut header = Header::new("couple");
    header.set("kind", kind).set("d", d);
    if kind == Kind::FmKd {
        header.set("k", k);
    }
    header
        .set("p", p)
        .set("depth", depth)
        .set("steps", steps)
        .set("trials", trials)
        .set("seed", seed)
        .set("check_invariants", mode);

    let config = SimConfig::new(ModelParams::new(d, p)?, depth, steps).recording_sites();
    config.validate()?;
    let pair = match kind {
        Kind::FmKd => format!("FM({d})->FM({})", k * d),
        Kind::RfmPlus1 => format!("RFM({d})->RFM'({})", d + 1),
    };
    let results = run_trials(trials, seed, |_, s| -> frogtree_core::Result<Trial> {
        Ok(match kind {
            Kind::FmKd => {
                let o = run_coupled_fm(&config, k, mode, s)?;
                Trial {
                    small: o.small,
                    large: o.large,
                    log: o.log,
                    aborted: o.aborted,
                    extra: None,
                }
            }
            Kind::RfmPlus1 => {
                let o = run_coupled_rfm(&config, mode, s)?;
                Trial {
                    small: o.small,
                    large: o.large,
                    log: o.log,
                    aborted: o.aborted,
                    extra: Some(o.extra),
                }
            }
        })
    })
    .into_iter()
    .collect::<frogtree_core::Result<Vec<_>>>()?;

    let mut csv = CsvOut::create(out.as_deref(), &header)?;
    let mut checks: BTreeMap<String, u64> = BTreeMap::new();
    let mut violations = 0;
    let mut first_failure = None;
    let mut extra = ExtraKillStats::default();
    for (i, t) in results.iter().enumerate() {
        let i = i as u64;
        csv.row(&Row {
            trial_id: i,
            pair: pair.clone(),
            violations: t.log.violations,
            checks: t.log.total_checks(),
            small_root_visits: t.small.root_visits,
            large_root_visits: t.large.root_visits,
            identical: t.small == t.large,
            aborted: t.aborted,
        })?;
        for (name, n) in &t.log.checks {
            *checks.entry(name.clone()).or_default() += n;
        }
        violations += t.log.violations;
        if !t.log.is_clean() && first_failure.is_none() {
            first_failure = Some(Failure {
                trial_id: i,
                trial_seed: trial_seed(seed, i),
                violation: t.log.first_violation.clone(),
            });
        }
        if let Some(e) = &t.extra {
            extra.merge(e);
        }
    }

    let extra_rows = (kind == Kind::RfmPlus1)
        .then(|| {
            (1..=d as usize + 1)
                .map(|s| {
                    let expected = effective_extra_kill(d, s as u32)?;
                    let n = extra.down_steps.get(s).copied().unwrap_or(0);
                    let frequency = extra.frequency(s);
                    let sd = (expected * (1.0 - expected) / n as f64).sqrt();
                    Ok(ExtraKillRow {
                        s_prime: s,
                        down_steps: n,
                        extra_kills: extra.extra_kills.get(s).copied().unwrap_or(0),
                        frequency,
                        expected,
                        z: frequency.filter(|_| sd > 0.0).map(|f| (f - expected) / sd),
                    })
                })
                .collect::<frogtree_core::Result<Vec<_>>>()
        })
        .transpose()?;

    let mut footer = vec![
        format!("pair = {pair}"),
        format!("checks = {}", checks.values().sum::<u64>()),
        format!("violations = {violations}"),
    ];
    for row in extra_rows.iter().flatten() {
        footer.push(format!(
            "extra_kill S'={} down_steps={} frequency={} expected={:.6}",
            row.s_prime,
            row.down_steps,
            row.frequency.map_or("undefined".to_owned(), |f| format!("{f:.6}")),
            row.expected
        ));
    }
    if let Some(f) = &first_failure {
        footer.push(format!(
            "first violation: trial {} (trial seed {}): {}",
            f.trial_id,
            f.trial_seed,
            f.violation
                .as_ref()
                .map_or("unrecorded".to_owned(), ToString::to_string)
        ));
    }
    csv.finish(&footer)?;

    let failure_msg = first_failure.as_ref().map(|f| {
        format!(
            "{violations} invariant violation(s); first in trial {} (trial seed {}): {}",
            f.trial_id,
            f.trial_seed,
            f.violation
                .as_ref()
                .map_or("unrecorded".to_owned(), ToString::to_string)
        )
    });
    if let Some(path) = report_path {
        let report = Report {
            kind: kind.to_string(),
            pair,
            trials,
            violations,
            checks,
            first_failure,
            extra_kill: extra_rows,
        };
        write_json(&path, &header, &report)?;
    }
    match failure_msg {
        Some(msg) => Err(InvariantError(msg).into()),
        None => Ok(()),
    }
}
