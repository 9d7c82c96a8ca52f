use std::io::Write;
use std::path::PathBuf;

use anyhow::Result;
use frogtree_core::bounds::{critical_rho, pa_table, q_star};
use serde::Serialize;

use crate::config::{FileConfig, Switch};
use crate::output::{open, write_json, Header};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Horizon of the P(A) product bound.
    #[arg(long = "T")]
    horizon: Option<u32>,
    /// Bisection tolerance on rho.
    #[arg(long)]
    tol: Option<f64>,
    /// Print the pa_lb table at rho* (on by default).
    #[arg(long)]
    table: Option<Switch>,
    /// Write the result as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Text output (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Report {
    #[serde(rename = "T")]
    t: u32,
    rho_star: Option<f64>,
    p_star: Option<f64>,
    tol: f64,
    bracket: Option<(f64, f64)>,
    crossings: usize,
    q_star: f64,
}

pub fn run(args: Args, file: &mut FileConfig) -> Result<()> {
    let t = file.resolve("T", args.horizon, 51u32)?;
    let tol = file.resolve("tol", args.tol, 1e-5)?;
    let table = file.resolve("table", args.table, Switch(true))?;
    let json = file.resolve_opt("json", args.json)?;
    let out = file.resolve_opt("out", args.out)?;
    std::mem::take(file).finish()?;

    let mut header = Header::new("bounds");
    header.set("T", t).set("tol", tol).set("table", table);
    let result = critical_rho(t, tol)?;
    let report = Report {
        t,
        rho_star: result.as_ref().map(|r| r.rho_star),
        p_star: result.as_ref().map(|r| r.p_star),
        tol,
        bracket: result.as_ref().map(|r| r.bracket),
        crossings: result.as_ref().map_or(0, |r| r.crossings),
        q_star: q_star(),
    };

    let mut w = open(out.as_deref())?;
    header.write_to(&mut w)?;
    writeln!(w, "T = {t}")?;
    match &result {
        Some(r) => {
            writeln!(w, "rho_star = {:.8}", r.rho_star)?;
            writeln!(w, "p_star = {:.8}", r.p_star)?;
            writeln!(w, "bracket = [{:.10}, {:.10}]", r.bracket.0, r.bracket.1)?;
            writeln!(w, "crossings = {}", r.crossings)?;
            if r.crossings > 1 {
                writeln!(
                    w,
                    "# warning: growth factor crosses 1 more than once; rho_star is the first crossing"
                )?;
            }
        }
        None => {
            writeln!(w, "rho_star = NONE")?;
            writeln!(w, "p_star = NONE")?;
        }
    }
    writeln!(w, "q_star = {:.17}", q_star())?;
    if table.0 {
        let rho = report.rho_star.unwrap_or(0.5);
        writeln!(w, "# pa_lb(t) at rho = {rho}")?;
        writeln!(w, "t,pa_lb")?;
        for (i, pa) in pa_table(t, rho)?.iter().enumerate().skip(1) {
            writeln!(w, "{i},{pa:.12}")?;
        }
    }
    w.flush()?;
    if let Some(path) = json {
        write_json(&path, &header, &report)?;
    }
    Ok(())
}
