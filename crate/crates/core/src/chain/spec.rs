use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boundary::{detect_boundaries, BoundaryKind, BoundaryLocation};
use crate::lti::RationalTf;
use crate::{Error, Result};

/// One agent: either plant and controllers, or the open loops directly.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentSpec {
    plant: Option<RationalTf>,
    cf: Option<RationalTf>,
    cr: Option<RationalTf>,
    mf: RationalTf,
    mr: Option<RationalTf>,
}

impl AgentSpec {
    /// Agent given by its front and rear open loops.
    pub fn from_loops(mf: RationalTf, mr: Option<RationalTf>) -> Self {
        Self {
            plant: None,
            cf: None,
            cr: None,
            mf,
            mr,
        }
    }

    /// Agent given by plant and front/rear controllers; the open loops are
    /// the products `P C_f` and `P C_r`.
    pub fn from_plant(plant: RationalTf, cf: RationalTf, cr: Option<RationalTf>) -> Self {
        let mf = plant.mul(&cf);
        let mr = cr.as_ref().map(|c| plant.mul(c));
        Self {
            plant: Some(plant),
            cf: Some(cf),
            cr,
            mf,
            mr,
        }
    }

    /// Same open loop front and rear.
    pub fn symmetric(m: RationalTf) -> Self {
        Self::from_loops(m.clone(), Some(m))
    }

    pub fn mf(&self) -> &RationalTf {
        &self.mf
    }

    pub fn mr(&self) -> Option<&RationalTf> {
        self.mr.as_ref()
    }

    pub fn plant(&self) -> Option<&RationalTf> {
        self.plant.as_ref()
    }

    pub fn cf(&self) -> Option<&RationalTf> {
        self.cf.as_ref()
    }

    pub fn cr(&self) -> Option<&RationalTf> {
        self.cr.as_ref()
    }

    /// Front and rear open loops are the same model.
    pub fn is_homogeneous(&self) -> bool {
        self.mr.as_ref().is_some_and(|mr| mr.same_model(&self.mf))
    }
}

/// Wave-absorbing controller placements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Absorber {
    /// First agent, cancels the reflection from the forced end.
    Leader,
    /// Last agent, cancels the reflection from the free end.
    Rear,
    /// Left-side soft-boundary law on agent `sigma`.
    SoftLeft(usize),
    /// Right-side soft-boundary law on agent `sigma + 1`.
    SoftRight(usize),
    /// Both hard-boundary laws on agent `eta`.
    Hard(usize),
}

impl fmt::Display for Absorber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Absorber::Leader => f.write_str("leader"),
            Absorber::Rear => f.write_str("rear"),
            Absorber::SoftLeft(s) => write!(f, "soft-left:{s}"),
            Absorber::SoftRight(s) => write!(f, "soft-right:{s}"),
            Absorber::Hard(e) => write!(f, "hard:{e}"),
        }
    }
}

impl Absorber {
    /// Parses `leader`, `rear`, `soft:S` (both soft laws), `soft-left:S`,
    /// `soft-right:S` or `hard:E`.
    pub fn parse_list(text: &str) -> Result<Vec<Absorber>> {
        if let Some(idx) = text.strip_prefix("soft:") {
            let s = parse_index(idx, text)?;
            return Ok(vec![Absorber::SoftLeft(s), Absorber::SoftRight(s)]);
        }
        Ok(vec![text.parse()?])
    }
}

fn parse_index(idx: &str, text: &str) -> Result<usize> {
    idx.trim()
        .parse::<usize>()
        .ok()
        .filter(|&v| v >= 1)
        .ok_or_else(|| Error::Config(format!("bad absorber site in \"{text}\"")))
}

impl FromStr for Absorber {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let t = text.trim();
        match t {
            "leader" => return Ok(Absorber::Leader),
            "rear" => return Ok(Absorber::Rear),
            _ => {}
        }
        let (kind, idx) = t
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("unknown absorber \"{t}\"")))?;
        let i = parse_index(idx, t)?;
        match kind {
            "soft-left" => Ok(Absorber::SoftLeft(i)),
            "soft-right" => Ok(Absorber::SoftRight(i)),
            "hard" => Ok(Absorber::Hard(i)),
            _ => Err(Error::Config(format!("unknown absorber \"{t}\""))),
        }
    }
}

/// Reference signal driving the first agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Reference {
    Step {
        amplitude: f64,
    },
    Ramp {
        slope: f64,
    },
    /// Samples held over each step, starting at `t = 0`.
    Samples {
        dt_s: f64,
        values: Vec<f64>,
    },
}

impl Default for Reference {
    fn default() -> Self {
        Reference::Step { amplitude: 1.0 }
    }
}

impl Reference {
    pub fn unit_step() -> Self {
        Self::default()
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Reference::Step { amplitude } => {
                if t >= 0.0 {
                    *amplitude
                } else {
                    0.0
                }
            }
            Reference::Ramp { slope } => slope * t.max(0.0),
            Reference::Samples { dt_s, values } => {
                if t < 0.0 || values.is_empty() {
                    return 0.0;
                }
                let k = ((t / dt_s) + 1e-9).floor() as usize;
                values[k.min(values.len() - 1)]
            }
        }
    }

    /// Laplace transform where it has a closed form.
    pub fn laplace(&self, s: Complex64) -> Option<Complex64> {
        match self {
            Reference::Step { amplitude } => Some(*amplitude / s),
            Reference::Ramp { slope } => Some(*slope / (s * s)),
            Reference::Samples { .. } => None,
        }
    }
}

/// Which injection input of an agent a signal drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    /// `W_f,i`, added to the front error.
    Front,
    /// `W_r,i`, added to the rear error.
    Rear,
}

/// External disturbance injected on one agent's channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Injection {
    pub agent: usize,
    pub channel: Channel,
    pub signal: Reference,
}

/// Validated chain of agents with absorber placements.
#[derive(Debug, Clone)]
pub struct ChainSpec {
    agents: Vec<AgentSpec>,
    absorbers: Vec<Absorber>,
    boundaries: Vec<BoundaryLocation>,
    pub reference: Reference,
    /// Relative perturbation of the neighbour model used when synthesising
    /// boundary absorbers (`H` is computed from `M (1 + mismatch)`).
    pub mismatch: f64,
    pub injections: Vec<Injection>,
}

impl ChainSpec {
    /// Builds a chain and checks that every absorber sits on a boundary of
    /// its kind (or on a chain end) and has the neighbours its law reads.
    pub fn new(agents: Vec<AgentSpec>, absorbers: Vec<Absorber>) -> Result<Self> {
        if agents.is_empty() {
            return Err(Error::InvalidChain("no agents".into()));
        }
        let mut chain = Self {
            agents,
            absorbers: Vec::new(),
            boundaries: Vec::new(),
            reference: Reference::default(),
            mismatch: 0.0,
            injections: Vec::new(),
        };
        let n = chain.len();
        for i in 1..n {
            if chain.agent(i).mr().is_none() {
                return Err(Error::Agent {
                    agent: i,
                    reason: "missing rear open loop".into(),
                });
            }
        }
        chain.boundaries = detect_boundaries(&chain);
        let mut absorbers = absorbers;
        absorbers.sort();
        absorbers.dedup();
        for a in &absorbers {
            chain.check_site(*a)?;
        }
        chain.absorbers = absorbers;
        Ok(chain)
    }

    pub fn with_reference(mut self, r: Reference) -> Self {
        self.reference = r;
        self
    }

    pub fn with_mismatch(mut self, m: f64) -> Self {
        self.mismatch = m;
        self
    }

    pub fn with_injection(mut self, inj: Injection) -> Result<Self> {
        let n = self.len();
        if inj.agent == 0 || inj.agent > n || (inj.channel == Channel::Rear && inj.agent == n) {
            return Err(Error::InvalidChain(format!(
                "no {:?} channel on agent {}",
                inj.channel, inj.agent
            )));
        }
        self.injections.push(inj);
        Ok(self)
    }

    fn has_boundary(&self, kind: BoundaryKind, index: usize) -> bool {
        self.boundaries
            .iter()
            .any(|b| b.kind == kind && b.index == index)
    }

    fn check_site(&self, a: Absorber) -> Result<()> {
        let n = self.len();
        let bad = |why: String| Err(Error::InvalidChain(format!("absorber {a}: {why}")));
        match a {
            Absorber::Leader | Absorber::Rear => Ok(()),
            Absorber::SoftLeft(s) | Absorber::SoftRight(s) => {
                if !self.has_boundary(BoundaryKind::Soft, s) {
                    return bad(format!("no soft boundary between agents {s} and {}", s + 1));
                }
                if matches!(a, Absorber::SoftLeft(_)) && s < 2 {
                    return Err(Error::UnsupportedTopology(format!(
                        "absorber {a} needs an agent left of agent {s}"
                    )));
                }
                if matches!(a, Absorber::SoftRight(_)) && s + 2 > n {
                    return Err(Error::UnsupportedTopology(format!(
                        "absorber {a} needs an agent right of agent {}",
                        s + 1
                    )));
                }
                Ok(())
            }
            Absorber::Hard(e) => {
                if !self.has_boundary(BoundaryKind::Hard, e) {
                    return bad(format!("agent {e} is not a hard boundary"));
                }
                if e < 2 || e + 1 > n {
                    return Err(Error::UnsupportedTopology(format!(
                        "absorber {a} needs neighbours on both sides"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Number of agents `N`.
    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    /// Agent `i`, 1-based.
    pub fn agent(&self, i: usize) -> &AgentSpec {
        &self.agents[i - 1]
    }

    pub fn agents(&self) -> &[AgentSpec] {
        &self.agents
    }

    pub fn absorbers(&self) -> &[Absorber] {
        &self.absorbers
    }

    pub fn has_absorber(&self, a: Absorber) -> bool {
        self.absorbers.contains(&a)
    }

    pub fn boundaries(&self) -> &[BoundaryLocation] {
        &self.boundaries
    }

    /// Rear open loop of agent `i`, or `None` for the last agent.
    pub fn rear_loop(&self, i: usize) -> Option<&RationalTf> {
        if i == self.len() {
            None
        } else {
            self.agent(i).mr()
        }
    }

    /// Distinct open loops in first-appearance order.
    pub fn distinct_loops(&self) -> Vec<RationalTf> {
        let mut out: Vec<RationalTf> = Vec::new();
        for i in 1..=self.len() {
            let a = self.agent(i);
            for m in std::iter::once(a.mf()).chain(self.rear_loop(i)) {
                if !out.iter().any(|o| o.same_model(m)) {
                    out.push(m.clone());
                }
            }
        }
        out
    }
}
