use std::path::PathBuf;

use anyhow::Result;
use frogtree_core::rfm::dominance_chain;
use frogtree_core::runner::run_trials;
use frogtree_core::schedule::SchedulePolicy;
use frogtree_core::sim::{simulate, Model, RootVisitEstimate, SimConfig};
use frogtree_core::ModelParams;

use super::DEFAULT_SEED;
use crate::config::{FileConfig, Switch};
use crate::exit::{InvariantError, UsageError};
use crate::output::{CsvOut, Header};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// fm, fmprime or rfm.
    #[arg(long)]
    model: Option<Model>,
    #[arg(long)]
    d: Option<u32>,
    #[arg(long)]
    p: Option<f64>,
    /// Depth cap: frogs reaching it are removed.
    #[arg(long)]
    depth: Option<u32>,
    /// Step cap per trial.
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// uniform or fifo.
    #[arg(long)]
    policy: Option<SchedulePolicy>,
    /// Deepest level holding sleepers (default: the depth cap).
    #[arg(long)]
    sleeper_depth: Option<u32>,
    /// Also run the RFM <= FM′ <= FM chain on every trial seed.
    #[arg(long)]
    check_invariants: Option<Switch>,
    /// CSV output (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: Args, file: &mut FileConfig) -> Result<()> {
    let model = file.resolve("model", args.model, Model::Fm)?;
    let d = file.resolve("d", args.d, 2)?;
    let p = file.resolve("p", args.p, 0.3)?;
    let depth = file.resolve("depth", args.depth, 10)?;
    let steps = file.resolve("steps", args.steps, 1_000_000)?;
    let trials = file.resolve("trials", args.trials, 100)?;
    let seed = file.resolve("seed", args.seed, DEFAULT_SEED)?;
    let policy = file.resolve("policy", args.policy, SchedulePolicy::default())?;
    let sleeper_depth = file.resolve_opt("sleeper_depth", args.sleeper_depth)?;
    let check = file.resolve("check_invariants", args.check_invariants, Switch(false))?;
    let out = file.resolve_opt("out", args.out)?;
    std::mem::take(file).finish()?;
    if trials == 0 {
        return Err(UsageError("--trials must be at least 1".into()).into());
    }

    let mut config = SimConfig::new(ModelParams::new(d, p)?, depth, steps).with_policy(policy);
    if let Some(s) = sleeper_depth {
        config = config.with_sleeper_depth(s);
    }
    config.validate()?;

    let mut header = Header::new("simulate");
    header
        .set("model", model)
        .set("d", d)
        .set("p", p)
        .set("depth", depth)
        .set("steps", steps)
        .set("trials", trials)
        .set("seed", seed)
        .set("policy", policy)
        .set("sleeper_depth", config.sleeper_limit())
        .set("check_invariants", check);

    let outcomes = run_trials(trials, seed, |_, s| simulate(model, &config, s))
        .into_iter()
        .collect::<frogtree_core::Result<Vec<_>>>()?;
    let est = RootVisitEstimate::from_outcomes(&config, &outcomes);

    let mut csv = CsvOut::create(out.as_deref(), &header)?;
    for row in &est.rows {
        csv.row(row)?;
    }
    let mut footer = vec![
        format!("trials = {}", est.summary.n),
        format!("mean_root_visits = {}", est.summary.mean),
        format!("std_error = {}", est.std_error),
        format!("step_capped = {}", est.step_capped),
    ];

    let mut broken = None;
    if check.0 {
        let chains = run_trials(trials, seed, |i, s| dominance_chain(&config, s).map(|c| (i, c)))
            .into_iter()
            .collect::<frogtree_core::Result<Vec<_>>>()?;
        let bad: Vec<_> = chains.iter().filter(|(_, c)| !c.ordered()).collect();
        footer.push(format!("chain_checks = {}", chains.len()));
        footer.push(format!("chain_violations = {}", bad.len()));
        if let Some((i, c)) = bad.first() {
            broken = Some(format!(
                "trial {i}: RFM {} / FM′ {} / FM {} root visits, {} FM′ pair violations",
                c.rfm.root_visits, c.fm_prime.root_visits, c.fm.root_visits, c.fm_pair_violations
            ));
        }
    }
    csv.finish(&footer)?;
    if let Some(msg) = broken {
        return Err(InvariantError(format!("dominance chain violated at {msg}")).into());
    }
    Ok(())
}
