use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::chain::{Absorber, AgentSpec, ChainSpec, Reference, SimOptions};
use crate::lti::{FreqGrid, RationalTf};
use crate::{Error, Result};

/// Only accepted value of the `schema` key.
pub const SCHEMA_VERSION: u32 = 1;

/// Coefficients in ascending powers of `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coeffs {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

impl Coeffs {
    pub fn to_tf(&self) -> Result<RationalTf> {
        RationalTf::from_coeffs(&self.num, &self.den)
    }
}

/// A named entry of `[models]` or inline coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelRef {
    Name(String),
    Inline(Coeffs),
}

/// One agent given by its open loops or by plant and controllers.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mf: Option<ModelRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mr: Option<ModelRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plant: Option<ModelRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cf: Option<ModelRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cr: Option<ModelRef>,
}

/// `count` identical symmetric agents, written `{ count = 4, model = "m1" }`
/// or `"4 x m1"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Segment {
    Short(String),
    Table { count: usize, model: ModelRef },
}

impl Segment {
    fn expand(&self) -> Result<(usize, ModelRef)> {
        match self {
            Segment::Table { count, model } => Ok((*count, model.clone())),
            Segment::Short(text) => {
                let bad = || {
                    Error::Config(format!(
                        "segment \"{text}\" is not of the form \"COUNT x MODEL\""
                    ))
                };
                let (count, model) = text.split_once(['x', '×', '*']).ok_or_else(bad)?;
                let count = count.trim().parse::<usize>().map_err(|_| bad())?;
                let model = model.trim();
                if model.is_empty() {
                    return Err(bad());
                }
                Ok((count, ModelRef::Name(model.to_string())))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub segments: Vec<Segment>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub agents: Vec<AgentEntry>,
    /// Entries as accepted by [`Absorber::parse_list`].
    #[serde(default)]
    pub absorbers: Vec<String>,
    /// Relative model error used when synthesising boundary absorbers.
    #[serde(default)]
    pub mismatch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub t_final_s: f64,
    pub dt_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fir_horizon_s: Option<f64>,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            t_final_s: 60.0,
            dt_s: 0.01,
            fir_horizon_s: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub omega_min_rad_s: f64,
    pub omega_max_rad_s: f64,
    pub points: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            omega_min_rad_s: 1e-3,
            omega_max_rad_s: 1e2,
            points: 512,
        }
    }
}

impl GridSection {
    pub fn grid(&self) -> Result<FreqGrid> {
        FreqGrid::log_spaced(self.omega_min_rad_s, self.omega_max_rad_s, self.points)
            .map_err(|e| Error::Config(format!("grid: {e}")))
    }
}

/// Time window over which one agent's output is averaged and compared
/// with the soft-boundary DC prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlateauSpec {
    pub agent: usize,
    pub t0_s: f64,
    pub t1_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    /// Relative band of the settling time.
    #[serde(default = "default_settling_tol")]
    pub settling_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plateau: Option<PlateauSpec>,
    #[serde(default = "yes")]
    pub decompose: bool,
}

fn default_settling_tol() -> f64 {
    0.02
}

fn yes() -> bool {
    true
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            settling_tol: default_settling_tol(),
            plateau: None,
            decompose: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Directory for traces and reports; nothing is written when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

/// One run of a scenario matrix. Unset fields keep the base values.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variant {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absorbers: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segments: Option<Vec<Segment>>,
    /// Replaces entries of `[models]` by name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub models: BTreeMap<String, Coeffs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plateau: Option<PlateauSpec>,
}

/// Parsed scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default)]
    pub models: BTreeMap<String, Coeffs>,
    pub chain: ChainSection,
    #[serde(default)]
    pub reference: Reference,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, rename = "variant", skip_serializing_if = "Vec::is_empty")]
    pub variants: Vec<Variant>,
}

/// Everything needed to execute one run.
#[derive(Debug, Clone)]
pub struct RunPlan {
    pub name: String,
    pub chain: ChainSpec,
    pub sim: SimOptions,
    pub grid: FreqGrid,
    pub analysis: AnalysisSection,
}

impl fmt::Display for ScenarioConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&toml::to_string(self).map_err(|_| fmt::Error)?)
    }
}

/// Parses and validates a scenario file. Syntax errors carry the line and
/// column; semantic errors name the offending agent, model or field.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    // the schema version is checked first so that a newer file gets a
    // version error instead of a confusing field error
    let raw: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    match raw.get("schema") {
        None => return Err(Error::Config("missing required key `schema`".into())),
        Some(toml::Value::Integer(v)) if *v == SCHEMA_VERSION as i64 => {}
        Some(v) => {
            return Err(Error::Config(format!(
                "unsupported schema {v}, expected {SCHEMA_VERSION}"
            )))
        }
    }
    let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

impl ScenarioConfig {
    /// Checks everything that does not need a chain to be built and then
    /// builds every run once.
    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema {}, expected {SCHEMA_VERSION}",
                self.schema
            )));
        }
        let s = &self.sim;
        if !(s.dt_s > 0.0) || !(s.t_final_s > s.dt_s) {
            return Err(Error::Config(format!(
                "sim: need 0 < dt_s < t_final_s, got {} and {}",
                s.dt_s, s.t_final_s
            )));
        }
        if let Some(h) = s.fir_horizon_s {
            if !(h >= s.dt_s) {
                return Err(Error::Config(format!(
                    "sim.fir_horizon_s = {h} is shorter than one step"
                )));
            }
        }
        if !(self.analysis.settling_tol > 0.0) {
            return Err(Error::Config(
                "analysis.settling_tol must be positive".into(),
            ));
        }
        let mut names: Vec<&str> = self.variants.iter().map(|v| v.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("variant names must be unique".into()));
        }
        for (name, c) in &self.models {
            c.to_tf()
                .map_err(|e| Error::Config(format!("model \"{name}\": {e}")))?;
        }
        self.plans().map(|_| ())
    }

    /// SHA-256 of the canonical serialisation, so comments and layout do
    /// not change it. The output location is left out.
    pub fn hash(&self) -> String {
        let canon = Self {
            output: OutputSection::default(),
            ..self.clone()
        }
        .to_string();
        let digest = Sha256::digest(canon.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// One plan per variant, or a single plan named after the scenario.
    pub fn plans(&self) -> Result<Vec<RunPlan>> {
        let grid = self.grid.grid()?;
        let sim = SimOptions {
            fir_horizon: self.sim.fir_horizon_s,
            ..SimOptions::new(self.sim.t_final_s, self.sim.dt_s)
        };
        let base = Variant {
            name: self.name.clone(),
            ..Variant::default()
        };
        let variants = if self.variants.is_empty() {
            std::slice::from_ref(&base)
        } else {
            &self.variants[..]
        };
        variants
            .iter()
            .map(|v| {
                let chain = self.build_chain(v).map_err(|e| match e {
                    Error::Config(m) if !self.variants.is_empty() => {
                        Error::Config(format!("variant \"{}\": {m}", v.name))
                    }
                    e => e,
                })?;
                let mut analysis = self.analysis.clone();
                if v.plateau.is_some() {
                    analysis.plateau = v.plateau.clone();
                }
                if let Some(p) = &analysis.plateau {
                    if p.agent == 0 || p.agent > chain.len() || !(p.t1_s > p.t0_s) {
                        return Err(Error::Config(format!(
                            "plateau: agent {} window [{}, {}] s is invalid for {} agents",
                            p.agent,
                            p.t0_s,
                            p.t1_s,
                            chain.len()
                        )));
                    }
                }
                Ok(RunPlan {
                    name: v.name.clone(),
                    chain,
                    sim: sim.clone(),
                    grid: grid.clone(),
                    analysis,
                })
            })
            .collect()
    }

    fn build_chain(&self, v: &Variant) -> Result<ChainSpec> {
        let mut models = self.models.clone();
        for (k, c) in &v.models {
            if !models.contains_key(k) {
                return Err(Error::Config(format!("overrides unknown model \"{k}\"")));
            }
            models.insert(k.clone(), c.clone());
        }
        let resolve = |r: &ModelRef, agent: usize| -> Result<RationalTf> {
            let c = match r {
                ModelRef::Name(n) => models.get(n).ok_or_else(|| Error::Agent {
                    agent,
                    reason: format!("unknown model \"{n}\""),
                })?,
                ModelRef::Inline(c) => c,
            };
            c.to_tf().map_err(|e| Error::Agent {
                agent,
                reason: e.to_string(),
            })
        };
        let segments = v.segments.as_ref().unwrap_or(&self.chain.segments);
        if !segments.is_empty() && !self.chain.agents.is_empty() && v.segments.is_none() {
            return Err(Error::Config(
                "chain: give either `segments` or `agents`, not both".into(),
            ));
        }
        let mut agents = Vec::new();
        if !segments.is_empty() {
            for seg in segments {
                let (count, model) = seg.expand()?;
                if count == 0 {
                    return Err(Error::Config("segment with zero agents".into()));
                }
                let m = resolve(&model, agents.len() + 1)?;
                agents.extend(std::iter::repeat_n(AgentSpec::symmetric(m), count));
            }
        } else {
            for (k, a) in self.chain.agents.iter().enumerate() {
                agents.push(agent_from_entry(a, k + 1, &resolve)?);
            }
        }
        if agents.is_empty() {
            return Err(Error::Config("chain has no agents".into()));
        }
        let n = agents.len();
        // the last agent's rear loop is unused; allow it to be omitted
        for (k, a) in agents.iter().enumerate().take(n - 1) {
            if a.mr().is_none() {
                return Err(Error::Agent {
                    agent: k + 1,
                    reason: "needs a rear loop (mr or cr)".into(),
                });
            }
        }
        let mut absorbers = Vec::new();
        for text in v.absorbers.as_ref().unwrap_or(&self.chain.absorbers) {
            absorbers.extend(Absorber::parse_list(text)?);
        }
        let chain = ChainSpec::new(agents, absorbers)?;
        if !(self.chain.mismatch.is_finite() && self.chain.mismatch > -1.0) {
            return Err(Error::Config(format!(
                "chain.mismatch = {} must exceed -1",
                self.chain.mismatch
            )));
        }
        Ok(chain
            .with_reference(self.reference.clone())
            .with_mismatch(self.chain.mismatch))
    }
}

fn agent_from_entry(
    a: &AgentEntry,
    agent: usize,
    resolve: &dyn Fn(&ModelRef, usize) -> Result<RationalTf>,
) -> Result<AgentSpec> {
    let opt = |r: &Option<ModelRef>| r.as_ref().map(|r| resolve(r, agent)).transpose();
    match (&a.mf, &a.plant) {
        (Some(mf), None) => {
            if a.cf.is_some() || a.cr.is_some() {
                return Err(Error::Agent {
                    agent,
                    reason: "controllers given without a plant".into(),
                });
            }
            Ok(AgentSpec::from_loops(resolve(mf, agent)?, opt(&a.mr)?))
        }
        (None, Some(p)) => {
            if a.mr.is_some() {
                return Err(Error::Agent {
                    agent,
                    reason: "mix of plant form and open-loop form".into(),
                });
            }
            let cf = a.cf.as_ref().ok_or_else(|| Error::Agent {
                agent,
                reason: "plant form needs cf".into(),
            })?;
            Ok(AgentSpec::from_plant(
                resolve(p, agent)?,
                resolve(cf, agent)?,
                opt(&a.cr)?,
            ))
        }
        (Some(_), Some(_)) => Err(Error::Agent {
            agent,
            reason: "give either mf or plant, not both".into(),
        }),
        (None, None) => Err(Error::Agent {
            agent,
            reason: "needs mf or plant".into(),
        }),
    }
}
