use std::path::PathBuf;

use anyhow::Result;
use frogtree_core::bounds::q_star;
use frogtree_core::sim::Model;
use frogtree_core::sweep::{run_sweep, SweepConfig};

use super::DEFAULT_SEED;
use crate::config::{FileConfig, List};
use crate::output::{write_json, CsvOut, Header};

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(long)]
    d: Option<u32>,
    /// Comma-separated drifts.
    #[arg(long)]
    p_grid: Option<List<f64>>,
    /// Comma-separated, increasing depth caps.
    #[arg(long)]
    depth_grid: Option<List<u32>>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Step cap per trial.
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    model: Option<Model>,
    /// Per-cell CSV (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Full report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

pub fn run(args: Args, file: &mut FileConfig) -> Result<()> {
    let d = file.resolve("d", args.d, 2)?;
    let p_grid = file.resolve("p_grid", args.p_grid, List(vec![0.1, 0.3, 0.35, 0.4, 0.45]))?;
    let depth_grid = file.resolve("depth_grid", args.depth_grid, List(vec![6, 8, 10]))?;
    let trials = file.resolve("trials", args.trials, 400)?;
    let seed = file.resolve("seed", args.seed, DEFAULT_SEED)?;
    let steps = file.resolve("steps", args.steps, 2_000_000)?;
    let model = file.resolve("model", args.model, Model::Fm)?;
    let out = file.resolve_opt("out", args.out)?;
    let report_path = file.resolve_opt("report", args.report)?;
    std::mem::take(file).finish()?;

    let mut header = Header::new("sweep");
    header
        .set("model", model)
        .set("d", d)
        .set("p_grid", &p_grid)
        .set("depth_grid", &depth_grid)
        .set("trials", trials)
        .set("seed", seed)
        .set("steps", steps);
    let report = run_sweep(&SweepConfig {
        model,
        d,
        p_grid: p_grid.0,
        depth_grid: depth_grid.0,
        trials,
        seed,
        step_cap: steps,
    })?;

    let mut csv = CsvOut::create(out.as_deref(), &header)?;
    for cell in &report.cells {
        csv.row(cell)?;
    }
    let mut footer: Vec<String> = report
        .verdicts
        .iter()
        .map(|v| format!("p = {}: last ratio {:.4}, {}", v.p, v.last_ratio, v.label))
        .collect();
    footer.push(format!("growth flag monotone in p: {}", report.monotone));
    footer.push(format!("q_star = {:.6}", q_star()));
    csv.finish(&footer)?;
    if let Some(path) = report_path {
        write_json(&path, &header, &report)?;
    }
    Ok(())
}
