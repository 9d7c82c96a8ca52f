use std::path::PathBuf;

use anyhow::Result;
use frogtree_core::bounds::{compute_moment_sequences, ev_fixed_point, stabilization, MomentBase};
use serde::Serialize;

use crate::config::FileConfig;
use crate::output::{write_json, CsvOut, Header};

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(long)]
    rho: Option<f64>,
    /// Number of recursion steps.
    #[arg(long = "T")]
    horizon: Option<u32>,
    /// V_0 law: zero or bernoulli.
    #[arg(long)]
    base: Option<MomentBase>,
    /// Threshold for reporting the first t with ev_lo above it.
    #[arg(long)]
    level: Option<f64>,
    /// Increment below which x_hi counts as settled.
    #[arg(long)]
    eps: Option<f64>,
    /// CSV output (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Serialize)]
struct Summary {
    first_exceeding: Option<u32>,
    x_settled_from: Option<u32>,
    x_sup: Option<f64>,
    x_sup_at: Option<u32>,
    ev_fixed_point: Option<f64>,
    ev_lo_last: f64,
}

pub fn run(args: Args, file: &mut FileConfig) -> Result<()> {
    let rho = file.resolve("rho", args.rho, 0.72)?;
    let horizon = file.resolve("T", args.horizon, 300u32)?;
    let base = file.resolve("base", args.base, MomentBase::Bernoulli)?;
    let level = file.resolve("level", args.level, 1e3)?;
    let eps = file.resolve("eps", args.eps, 1e-9)?;
    let out = file.resolve_opt("out", args.out)?;
    let json = file.resolve_opt("json", args.json)?;
    std::mem::take(file).finish()?;

    let mut header = Header::new("moments");
    header
        .set("rho", rho)
        .set("T", horizon)
        .set("base", base)
        .set("level", level)
        .set("eps", eps);
    let m = compute_moment_sequences(rho, horizon, base)?;
    let stab = stabilization(&m.x_hi, eps);
    let summary = Summary {
        first_exceeding: m.first_exceeding(level),
        x_settled_from: stab.map(|s| s.from),
        x_sup: stab.map(|s| s.sup),
        x_sup_at: stab.map(|s| s.sup_at),
        ev_fixed_point: ev_fixed_point(rho)?,
        ev_lo_last: m.ev_lo[horizon as usize],
    };

    let mut csv = CsvOut::create(out.as_deref(), &header)?;
    for row in m.rows() {
        csv.row(&row)?;
    }
    let opt = |x: Option<f64>| x.map_or("undefined".to_owned(), |x| format!("{x}"));
    let footer = vec![
        format!(
            "first t with ev_lo > {level}: {}",
            summary.first_exceeding.map_or("none".to_owned(), |t| t.to_string())
        ),
        match stab {
            Some(s) => format!(
                "x_hi settled (increments < {eps}) from t = {}; sup = {} at t = {}",
                s.from, s.sup, s.sup_at
            ),
            None => format!("x_hi not settled within T = {horizon}"),
        },
        format!("ev_lo fixed point: {}", opt(summary.ev_fixed_point)),
    ];
    csv.finish(&footer)?;
    if let Some(path) = json {
        write_json(&path, &header, &summary)?;
    }
    Ok(())
}
