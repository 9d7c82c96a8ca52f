use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::Result;
use frogtree_core::rde::sample_rde_bound;
use frogtree_core::rfm::sample_vt;
use frogtree_core::runner::run_trials;
use frogtree_core::sim::Truncation;
use frogtree_core::{ModelParams, Summary};
use serde::Serialize;

use super::DEFAULT_SEED;
use crate::config::FileConfig;
use crate::exit::UsageError;
use crate::output::{CsvOut, Header};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Bound,
    Empirical,
    Both,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Bound => "bound",
            Mode::Empirical => "empirical",
            Mode::Both => "both",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bound" => Ok(Mode::Bound),
            "empirical" => Ok(Mode::Empirical),
            "both" => Ok(Mode::Both),
            _ => Err(format!("unknown mode {s:?} (expected bound, empirical or both)")),
        }
    }
}

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(long)]
    t: Option<u32>,
    #[arg(long)]
    rho: Option<f64>,
    /// Tree degree for the empirical mode.
    #[arg(long)]
    d: Option<u32>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// bound (recursion surrogate), empirical (direct RFM) or both.
    #[arg(long)]
    mode: Option<Mode>,
    /// Step cap per empirical trial.
    #[arg(long)]
    steps: Option<u64>,
    /// Per-trial CSV (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Row {
    trial_id: u64,
    mode: &'static str,
    t: u32,
    v: u64,
    step_capped: bool,
}

fn summary_line(name: &str, values: &[u64]) -> (Summary, String) {
    let s = Summary::from_counts(values);
    let p0 = values.iter().filter(|&&v| v == 0).count() as f64 / values.len() as f64;
    let line = format!(
        "{name}: n = {}, mean = {:.6}, std_error = {:.6}, variance = {:.6}, P(V = 0) = {:.6}",
        s.n,
        s.mean,
        s.std_error(),
        s.variance,
        p0
    );
    (s, line)
}

pub fn run(args: Args, file: &mut FileConfig) -> Result<()> {
    let t = file.resolve("t", args.t, 2)?;
    let rho = file.resolve("rho", args.rho, 0.72)?;
    let d = file.resolve("d", args.d, 2)?;
    let trials = file.resolve("trials", args.trials, 10_000)?;
    let seed = file.resolve("seed", args.seed, DEFAULT_SEED)?;
    let mode = file.resolve("mode", args.mode, Mode::Both)?;
    let steps = file.resolve("steps", args.steps, 10_000_000)?;
    let out = file.resolve_opt("out", args.out)?;
    std::mem::take(file).finish()?;
    if trials == 0 {
        return Err(UsageError("--trials must be at least 1".into()).into());
    }
    let params = ModelParams::from_rho(d, rho)?;

    let mut header = Header::new("vt");
    header
        .set("t", t)
        .set("rho", rho)
        .set("p", params.p())
        .set("d", d)
        .set("trials", trials)
        .set("seed", seed)
        .set("mode", mode)
        .set("steps", steps);

    let bound = if mode != Mode::Empirical {
        Some(
            run_trials(trials, seed, |_, s| sample_rde_bound(t, rho, s))
                .into_iter()
                .collect::<frogtree_core::Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    let empirical = if mode != Mode::Bound {
        Some(
            run_trials(trials, seed, |_, s| sample_vt(t, params, steps, s))
                .into_iter()
                .collect::<frogtree_core::Result<Vec<_>>>()?,
        )
    } else {
        None
    };

    let mut csv = CsvOut::create(out.as_deref(), &header)?;
    let mut footer = Vec::new();
    let mut bound_summary = None;
    if let Some(values) = &bound {
        for (i, &v) in values.iter().enumerate() {
            csv.row(&Row {
                trial_id: i as u64,
                mode: "bound",
                t,
                v,
                step_capped: false,
            })?;
        }
        let (s, line) = summary_line("bound", values);
        footer.push(line);
        bound_summary = Some(s);
    }
    if let Some(samples) = &empirical {
        for (i, x) in samples.iter().enumerate() {
            csv.row(&Row {
                trial_id: i as u64,
                mode: "empirical",
                t,
                v: x.v,
                step_capped: x.truncation == Truncation::StepCap,
            })?;
        }
        let values: Vec<u64> = samples.iter().map(|x| x.v).collect();
        let (s, line) = summary_line("empirical", &values);
        footer.push(line);
        let capped = samples.iter().filter(|x| x.truncation == Truncation::StepCap).count();
        footer.push(format!("empirical step_capped = {capped}"));
        if let Some(b) = bound_summary {
            let se = b.pooled_se(&s);
            footer.push(format!(
                "bound mean - empirical mean = {:.6} ({:.2} pooled SE); bound <= empirical + 3 SE: {}",
                b.mean - s.mean,
                if se > 0.0 { (b.mean - s.mean) / se } else { 0.0 },
                b.mean <= s.mean + 3.0 * se
            ));
        }
    }
    csv.finish(&footer)?;
    Ok(())
}
