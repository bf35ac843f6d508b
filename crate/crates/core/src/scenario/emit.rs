//! Trace and report files.
//!
//! Per run, under `<dir>/<run>/`:
//!
//! - `traces.csv`: `t, x_1..x_N, a_1..a_N, b_1..b_N, u_1..u_N`, then
//!   `aL_e, bL_e, aR_e, bR_e` for every hard-boundary agent `e` in
//!   ascending order. Wave columns are empty past the trusted window.
//! - `agent0.csv`: `t, x_ref, x_0, a_0, b_0` where `x_0 = x_ref + w_f,1`
//!   is the input seen by agent 1, `a_0 = x_ref` and `b_0 = x_0 - x_ref`.
//! - `report.toml`: the [`RunReport`].
//!
//! `<dir>/summary.toml` lists the headline numbers of every run.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::run::{RunOutcome, RunReport, ScenarioOutcome};
use crate::chain::{SimulationResult, WaveDecomposition};
use crate::{Error, Result};

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Header of `traces.csv`.
pub fn trace_header(n: usize, hard: &[usize]) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for p in ["x", "a", "b", "u"] {
        h.extend((1..=n).map(|i| format!("{p}_{i}")));
    }
    for e in hard {
        h.extend(["aL", "bL", "aR", "bR"].iter().map(|p| format!("{p}_{e}")));
    }
    h
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Writes `traces.csv` and `agent0.csv` into `dir`.
pub fn emit_traces(
    sim: &SimulationResult,
    waves: Option<&WaveDecomposition>,
    dir: &Path,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let n = sim.n_agents();
    let hard: Vec<usize> = waves
        .map(|w| {
            w.agents
                .iter()
                .filter(|a| a.hard.is_some())
                .map(|a| a.agent)
                .collect()
        })
        .unwrap_or_default();
    let trusted = waves.map_or(0, |w| w.trusted_len);
    let mut wr = csv::Writer::from_path(dir.join("traces.csv")).map_err(csv_err)?;
    wr.write_record(trace_header(n, &hard)).map_err(csv_err)?;
    let wave = |k: usize, f: &dyn Fn(&WaveDecomposition) -> f64| match waves {
        Some(w) if k < trusted => fmt(f(w)),
        _ => String::new(),
    };
    for k in 0..sim.len() {
        let mut row = Vec::with_capacity(1 + 4 * n + 4 * hard.len());
        row.push(fmt(sim.t[k]));
        row.extend(sim.x.iter().map(|x| fmt(x[k])));
        for i in 0..n {
            row.push(wave(k, &|w| w.agents[i].a[k]));
        }
        for i in 0..n {
            row.push(wave(k, &|w| w.agents[i].b[k]));
        }
        row.extend(sim.u.iter().map(|u| fmt(u[k])));
        for &e in &hard {
            row.push(wave(k, &|w| w.agents[e - 1].hard.as_ref().unwrap().a_l[k]));
            row.push(wave(k, &|w| w.agents[e - 1].hard.as_ref().unwrap().b_l[k]));
            row.push(wave(k, &|w| w.agents[e - 1].hard.as_ref().unwrap().a_r[k]));
            row.push(wave(k, &|w| w.agents[e - 1].hard.as_ref().unwrap().b_r[k]));
        }
        wr.write_record(&row).map_err(csv_err)?;
    }
    wr.flush()?;

    let mut wr = csv::Writer::from_path(dir.join("agent0.csv")).map_err(csv_err)?;
    wr.write_record(["t", "x_ref", "x_0", "a_0", "b_0"])
        .map_err(csv_err)?;
    for k in 0..sim.len() {
        let b0 = sim.x0[k] - sim.x_ref[k];
        wr.write_record([
            fmt(sim.t[k]),
            fmt(sim.x_ref[k]),
            fmt(sim.x0[k]),
            fmt(sim.x_ref[k]),
            fmt(b0),
        ])
        .map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn report_text(report: &RunReport) -> Result<String> {
    toml::to_string(report).map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    run: &'a str,
    diverged: bool,
    stability_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    last_agent_settling_time_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    last_agent_steady_state: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    plateau_measured: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    plateau_predicted: Option<f64>,
}

#[derive(Serialize)]
struct Summary<'a> {
    scenario: &'a str,
    run: Vec<SummaryRow<'a>>,
}

pub fn summary_text(out: &ScenarioOutcome) -> Result<String> {
    let rows = out
        .runs
        .iter()
        .map(|r| {
            let rep = &r.report;
            let last = rep.settling.last();
            SummaryRow {
                run: &rep.run,
                diverged: rep.diverged,
                stability_ok: rep.stability_ok,
                max_norm: rep.norms.as_ref().map(|n| n.max),
                last_agent_settling_time_s: last.and_then(|s| s.settling_time_s),
                last_agent_steady_state: last.map(|s| s.steady_state),
                max_residual: rep.decomposition.as_ref().map(|d| d.max_residual),
                plateau_measured: rep.plateau.as_ref().map(|p| p.measured),
                plateau_predicted: rep.plateau.as_ref().map(|p| p.predicted),
            }
        })
        .collect();
    toml::to_string(&Summary {
        scenario: &out.name,
        run: rows,
    })
    .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

/// Directory of one run's files.
pub fn run_dir(root: &Path, run: &RunOutcome) -> PathBuf {
    root.join(&run.report.run)
}

/// Writes every run's traces and report plus the scenario summary.
pub fn emit_scenario(out: &ScenarioOutcome, root: &Path) -> Result<()> {
    fs::create_dir_all(root)?;
    for run in &out.runs {
        let dir = run_dir(root, run);
        fs::create_dir_all(&dir)?;
        if let Some(sim) = &run.sim {
            emit_traces(sim, run.waves.as_ref(), &dir)?;
        }
        fs::write(dir.join("report.toml"), report_text(&run.report)?)?;
    }
    fs::write(root.join("summary.toml"), summary_text(out)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_width() {
        assert_eq!(trace_header(8, &[]).len(), 33);
        let h = trace_header(3, &[2]);
        assert_eq!(h.len(), 1 + 12 + 4);
        assert_eq!(&h[13..], ["aL_2", "bL_2", "aR_2", "bR_2"]);
        assert_eq!(h[1], "x_1");
        assert_eq!(h[12], "u_3");
    }
}
