use rayon::prelude::*;
use serde::Serialize;

use super::config::{RunPlan, ScenarioConfig};
use crate::boundary::{soft_dc_gains, BoundaryKind, DcGainRecord};
use crate::chain::{
    chain_freq_response, local_plateau_estimate, plateau_mean, settling_time, simulate,
    steady_state_value, wave_decompose, HardSign, SimulationResult, WaveDecomposition,
};
use crate::lti::hinf_norm_sampled;
use crate::wave::{check_wtf_stability, StabilityReport};
use crate::{Error, Result};

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Parameters {
    pub n_agents: usize,
    pub absorbers: Vec<String>,
    pub t_final_s: f64,
    pub dt_s: f64,
    pub fir_horizon_s: f64,
    pub omega_min_rad_s: f64,
    pub omega_max_rad_s: f64,
    pub grid_points: usize,
    pub mismatch: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryEntry {
    pub kind: String,
    pub index: usize,
}

/// Soft-boundary DC gains between agents `sigma` and `sigma + 1`.
#[derive(Debug, Clone, Serialize)]
pub struct DcEntry {
    pub sigma: usize,
    #[serde(flatten)]
    pub gains: DcGainRecord,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityEntry {
    /// Agents whose front or rear loop is this model.
    pub agents: Vec<usize>,
    pub model: String,
    #[serde(flatten)]
    pub report: StabilityReport,
}

/// Grid peaks of `|X_i/X_ref|` with the chain's absorbers in place.
#[derive(Debug, Clone, Serialize)]
pub struct NormTable {
    pub per_agent: Vec<f64>,
    pub max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AgentSettling {
    pub agent: usize,
    pub steady_state: f64,
    /// Absent when the trace never enters the band for good.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub settling_time_s: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionEntry {
    pub trusted_until_s: f64,
    pub max_residual: f64,
    pub residuals: Vec<f64>,
    pub rules: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlateauEntry {
    pub agent: usize,
    pub t0_s: f64,
    pub t1_s: f64,
    pub measured: f64,
    pub predicted: f64,
}

/// Everything asserted about one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub run: String,
    pub provenance: Provenance,
    pub parameters: Parameters,
    pub diverged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub divergence_time_s: Option<f64>,
    pub stability_ok: bool,
    pub warnings: Vec<String>,
    pub boundaries: Vec<BoundaryEntry>,
    pub dc_gains: Vec<DcEntry>,
    pub stability: Vec<StabilityEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norms: Option<NormTable>,
    pub settling: Vec<AgentSettling>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<DecompositionEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plateau: Option<PlateauEntry>,
}

/// Report plus the traces it was computed from.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub sim: Option<SimulationResult>,
    pub waves: Option<WaveDecomposition>,
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub name: String,
    pub runs: Vec<RunOutcome>,
}

impl ScenarioOutcome {
    pub fn any_diverged(&self) -> bool {
        self.runs.iter().any(|r| r.report.diverged)
    }

    pub fn stability_ok(&self) -> bool {
        self.runs.iter().all(|r| r.report.stability_ok)
    }

    pub fn run(&self, name: &str) -> Option<&RunOutcome> {
        self.runs.iter().find(|r| r.report.run == name)
    }
}

/// What a run computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    /// Frequency-domain analysis, simulation and decomposition.
    Full,
    /// Frequency-domain analysis only.
    AnalyzeOnly,
}

/// Executes every run of the scenario, in parallel.
pub fn run_scenario(cfg: &ScenarioConfig, mode: RunMode) -> Result<ScenarioOutcome> {
    let plans = cfg.plans()?;
    let hash = cfg.hash();
    let runs = plans
        .par_iter()
        .map(|p| run_plan(cfg, &hash, p, mode))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScenarioOutcome {
        name: cfg.name.clone(),
        runs,
    })
}

fn analysis_header(cfg: &ScenarioConfig, hash: &str, plan: &RunPlan) -> Result<RunReport> {
    let chain = &plan.chain;
    let boundaries = chain
        .boundaries()
        .iter()
        .map(|b| BoundaryEntry {
            kind: match b.kind {
                BoundaryKind::Soft => "soft".into(),
                BoundaryKind::Hard => "hard".into(),
            },
            index: b.index,
        })
        .collect();
    let mut dc_gains = Vec::new();
    let mut warnings = Vec::new();
    for b in chain
        .boundaries()
        .iter()
        .filter(|b| b.kind == BoundaryKind::Soft)
    {
        let mr = chain
            .rear_loop(b.index)
            .expect("soft boundary has a rear loop");
        match soft_dc_gains(mr, chain.agent(b.index + 1).mf()) {
            Ok(gains) => dc_gains.push(DcEntry {
                sigma: b.index,
                gains,
            }),
            Err(e) => warnings.push(format!("soft boundary {}: {e}", b.index)),
        }
    }
    let mut stability: Vec<StabilityEntry> = Vec::new();
    for (i, a) in chain.agents().iter().enumerate() {
        for m in std::iter::once(a.mf()).chain(chain.rear_loop(i + 1)) {
            match stability.iter_mut().find(|e| e.model == m.to_string()) {
                Some(e) => {
                    if e.agents.last() != Some(&(i + 1)) {
                        e.agents.push(i + 1);
                    }
                }
                None => stability.push(StabilityEntry {
                    agents: vec![i + 1],
                    model: m.to_string(),
                    report: check_wtf_stability(m, &plan.grid),
                }),
            }
        }
    }
    for e in stability.iter().filter(|e| !e.report.verdict) {
        warnings.push(format!(
            "wave transfer function of {} is not stable",
            e.model
        ));
    }
    let stability_ok = stability.iter().all(|e| e.report.verdict);
    let sim = &plan.sim;
    Ok(RunReport {
        scenario: cfg.name.clone(),
        run: plan.name.clone(),
        provenance: Provenance {
            config_hash: hash.to_string(),
            tool_version: TOOL_VERSION.into(),
            preset: cfg.preset.clone(),
        },
        parameters: Parameters {
            n_agents: chain.len(),
            absorbers: chain.absorbers().iter().map(|a| a.to_string()).collect(),
            t_final_s: sim.t_final,
            dt_s: sim.dt,
            fir_horizon_s: sim.fir_horizon.unwrap_or(sim.t_final),
            omega_min_rad_s: plan.grid.min(),
            omega_max_rad_s: plan.grid.max(),
            grid_points: plan.grid.len(),
            mismatch: chain.mismatch,
        },
        diverged: false,
        divergence_time_s: None,
        stability_ok,
        warnings,
        boundaries,
        dc_gains,
        stability,
        norms: None,
        settling: Vec::new(),
        decomposition: None,
        plateau: None,
    })
}

/// Runs one plan. Divergence is recorded in the report, not returned as
/// an error.
pub fn run_plan(
    cfg: &ScenarioConfig,
    hash: &str,
    plan: &RunPlan,
    mode: RunMode,
) -> Result<RunOutcome> {
    let chain = &plan.chain;
    let mut report = analysis_header(cfg, hash, plan)?;
    match chain_freq_response(chain, &plan.grid, HardSign::Consistent) {
        Ok(fr) => {
            let per_agent: Vec<f64> = (0..chain.len())
                .map(|i| hinf_norm_sampled(&fr, i))
                .collect();
            let max = per_agent.iter().fold(0.0_f64, |m, v| m.max(*v));
            report.norms = Some(NormTable { per_agent, max });
        }
        Err(e) => report.warnings.push(format!("frequency response: {e}")),
    }
    if mode == RunMode::AnalyzeOnly {
        return Ok(RunOutcome {
            report,
            sim: None,
            waves: None,
        });
    }
    let sim = match simulate(chain, &plan.sim) {
        Ok(s) => s,
        Err(Error::Divergence { t }) => {
            report.diverged = true;
            report.divergence_time_s = Some(t);
            return Ok(RunOutcome {
                report,
                sim: None,
                waves: None,
            });
        }
        Err(e) => return Err(e),
    };
    report.settling = sim
        .x
        .iter()
        .enumerate()
        .map(|(i, x)| AgentSettling {
            agent: i + 1,
            steady_state: steady_state_value(x),
            settling_time_s: settling_time(&sim.t, x, plan.analysis.settling_tol),
        })
        .collect();
    if let Some(p) = &plan.analysis.plateau {
        report.plateau = Some(PlateauEntry {
            agent: p.agent,
            t0_s: p.t0_s,
            t1_s: p.t1_s,
            measured: plateau_mean(&sim.t, &sim.x[p.agent - 1], p.t0_s, p.t1_s),
            predicted: local_plateau_estimate(chain, p.agent)?,
        });
    }
    let waves = if plan.analysis.decompose {
        let dec = wave_decompose(chain, &sim)?;
        report.decomposition = Some(DecompositionEntry {
            trusted_until_s: (dec.trusted_len - 1) as f64 * dec.dt,
            max_residual: dec.max_residual(),
            residuals: dec.agents.iter().map(|a| a.residual).collect(),
            rules: dec
                .agents
                .iter()
                .map(|a| {
                    serde_json::to_value(a.rule)
                        .ok()
                        .and_then(|v| v.as_str().map(String::from))
                        .unwrap_or_default()
                })
                .collect(),
        });
        Some(dec)
    } else {
        None
    };
    Ok(RunOutcome {
        report,
        sim: Some(sim),
        waves,
    })
}
