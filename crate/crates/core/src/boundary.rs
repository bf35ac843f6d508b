//! Soft and hard boundary transfer functions, their DC gains and boundary
//! detection along a chain.

use num_complex::Complex64;
use serde::Serialize;

use crate::chain::ChainSpec;
use crate::lti::{FreqGrid, RationalTf};
use crate::wave::{IrrationalBlock, WavePoint, WaveTf};
use crate::{Error, Result};

/// `|1 - HG|` below this is treated as singular.
const SINGULAR_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Soft,
    Hard,
}

/// Soft boundaries sit between agents `index` and `index + 1`, hard ones at
/// agent `index` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundaryLocation {
    pub kind: BoundaryKind,
    pub index: usize,
}

/// The four boundary responses at one point. For a soft boundary the fields
/// are `T_aa, T_ab, T_ba, T_bb`; for a hard one `T_AA, T_AB, T_BA, T_BB`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BtfPoint {
    pub aa: Complex64,
    pub ab: Complex64,
    pub ba: Complex64,
    pub bb: Complex64,
}

fn one_minus_hg(g: &WavePoint, h: &WavePoint, s: Complex64) -> Result<Complex64> {
    let (ug, uh) = (g.one_minus_g, h.one_minus_g);
    let den = ug + uh - ug * uh;
    if den.norm() < SINGULAR_TOL {
        return Err(Error::SingularDenominator { s });
    }
    Ok(den)
}

/// Soft responses from `G` and `H` values, written in terms of `1-G` and
/// `1-H` so that they stay accurate close to DC.
pub fn soft_btf_point(g: &WavePoint, h: &WavePoint, s: Complex64) -> Result<BtfPoint> {
    let den = one_minus_hg(g, h, s)?;
    let (ug, uh) = (g.one_minus_g, h.one_minus_g);
    Ok(BtfPoint {
        aa: h.g * ug * (2.0 - ug) / den,
        ab: g.g * (ug - uh) / den,
        ba: h.g * (uh - ug) / den,
        bb: g.g * uh * (2.0 - uh) / den,
    })
}

pub fn hard_btf_point(g: &WavePoint, h: &WavePoint, s: Complex64) -> Result<BtfPoint> {
    let den = one_minus_hg(g, h, s)?;
    let (ug, uh) = (g.one_minus_g, h.one_minus_g);
    Ok(BtfPoint {
        aa: (2.0 - ug) * uh / den,
        ab: (uh - ug) / den,
        ba: (ug - uh) / den,
        bb: (2.0 - uh) * ug / den,
    })
}

/// Boundary responses on a frequency grid. Grid points where `1 - HG`
/// vanishes are masked: their values are NaN and their frequencies listed.
#[derive(Debug, Clone)]
pub struct BoundaryTfSet {
    pub kind: BoundaryKind,
    pub omegas: Vec<f64>,
    pub aa: Vec<Complex64>,
    pub ab: Vec<Complex64>,
    pub ba: Vec<Complex64>,
    pub bb: Vec<Complex64>,
    pub g_values: Vec<Complex64>,
    pub h_values: Vec<Complex64>,
    pub masked: Vec<f64>,
    pub g: WaveTf,
    pub h: WaveTf,
}

fn btf_set(kind: BoundaryKind, g: &WaveTf, h: &WaveTf, grid: &FreqGrid) -> Result<BoundaryTfSet> {
    let path: Vec<Complex64> = grid
        .omegas()
        .iter()
        .map(|&w| Complex64::new(0.0, w))
        .collect();
    let gp = g.eval_path(&path);
    let hp = h.eval_path(&path);
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let mut set = BoundaryTfSet {
        kind,
        omegas: grid.omegas().to_vec(),
        aa: Vec::with_capacity(path.len()),
        ab: Vec::with_capacity(path.len()),
        ba: Vec::with_capacity(path.len()),
        bb: Vec::with_capacity(path.len()),
        g_values: gp.iter().map(|p| p.g).collect(),
        h_values: hp.iter().map(|p| p.g).collect(),
        masked: Vec::new(),
        g: g.clone(),
        h: h.clone(),
    };
    for (k, &s) in path.iter().enumerate() {
        let point = match kind {
            BoundaryKind::Soft => soft_btf_point(&gp[k], &hp[k], s),
            BoundaryKind::Hard => hard_btf_point(&gp[k], &hp[k], s),
        };
        let p = match point {
            Ok(p) => p,
            Err(Error::SingularDenominator { .. }) => {
                set.masked.push(s.im);
                BtfPoint {
                    aa: nan,
                    ab: nan,
                    ba: nan,
                    bb: nan,
                }
            }
            Err(e) => return Err(e),
        };
        set.aa.push(p.aa);
        set.ab.push(p.ab);
        set.ba.push(p.ba);
        set.bb.push(p.bb);
    }
    if set.masked.len() == path.len() {
        return Err(Error::SingularDenominator { s: path[0] });
    }
    Ok(set)
}

/// Soft boundary responses: `G` is the wave transfer function left of the
/// boundary, `H` the one to its right.
pub fn soft_btfs(g: &WaveTf, h: &WaveTf, grid: &FreqGrid) -> Result<BoundaryTfSet> {
    btf_set(BoundaryKind::Soft, g, h, grid)
}

/// Hard boundary responses: `G` from the front open loop of the boundary
/// agent, `H` from its rear open loop.
pub fn hard_btfs(g: &WaveTf, h: &WaveTf, grid: &FreqGrid) -> Result<BoundaryTfSet> {
    btf_set(BoundaryKind::Hard, g, h, grid)
}

/// `T_L = M_f/(1 + M_f + M_r)` and `T_R = M_r/(1 + M_f + M_r)`.
pub fn tl_tr_of(mf: &RationalTf, mr: &RationalTf, s: Complex64) -> Result<(Complex64, Complex64)> {
    let f = mf.eval(s)?;
    let r = mr.eval(s)?;
    let den = 1.0 + f + r;
    if den.norm() < SINGULAR_TOL {
        return Err(Error::SingularDenominator { s });
    }
    Ok((f / den, r / den))
}

/// Residual of the balance
/// `A_L (1 - T_L/G) + B_L (1 - T_L G) = B_R T_R/H + A_R T_R H`
/// when `B_L` and `A_R` are produced from incident `A_L`, `B_R` by the hard
/// boundary responses.
pub fn hard_balance_residual(
    mf: &RationalTf,
    mr: &RationalTf,
    s: Complex64,
    a_l: Complex64,
    b_r: Complex64,
) -> Result<f64> {
    let (tl, tr) = tl_tr_of(mf, mr, s)?;
    let g = WaveTf::new(mf.clone()).eval_point(s);
    let h = WaveTf::new(mr.clone()).eval_point(s);
    let t = hard_btf_point(&g, &h, s)?;
    let b_l = t.ab * a_l + t.bb * b_r;
    let a_r = t.aa * a_l + t.ba * b_r;
    let lhs = a_l * (1.0 - tl / g.g) + b_l * (1.0 - tl * g.g);
    let rhs = b_r * tr / h.g + a_r * tr * h.g;
    Ok((lhs - rhs).norm() / (1.0 + lhs.norm().max(rhs.norm())))
}

/// Zero-frequency gains of a soft boundary and of the associated hard one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DcGainRecord {
    pub kaa: f64,
    pub kab: f64,
    pub kba: f64,
    pub kbb: f64,
    #[serde(rename = "kAA")]
    pub k_aa_hard: f64,
    #[serde(rename = "kAB")]
    pub k_ab_hard: f64,
    #[serde(rename = "kBA")]
    pub k_ba_hard: f64,
    #[serde(rename = "kBB")]
    pub k_bb_hard: f64,
    pub nu_f: usize,
    pub nu_r: usize,
    pub n10_d10: f64,
    pub n20_d20: f64,
}

impl DcGainRecord {
    fn from_kaa(kaa: f64, nu_f: usize, nu_r: usize, n10_d10: f64, n20_d20: f64) -> Self {
        let kbb = 2.0 - kaa;
        let kab = kaa - 1.0;
        let kba = -kab;
        Self {
            kaa,
            kab,
            kba,
            kbb,
            k_aa_hard: kbb,
            k_ab_hard: kba,
            k_ba_hard: kab,
            k_bb_hard: kaa,
            nu_f,
            nu_r,
            n10_d10,
            n20_d20,
        }
    }
}

/// Soft-boundary DC gains from the integrator counts and low-frequency
/// constants of `M_r` left of the boundary and `M_f` right of it.
pub fn soft_dc_gains(mr_sigma: &RationalTf, mf_next: &RationalTf) -> Result<DcGainRecord> {
    let nu_r = mr_sigma.count_integrators();
    let nu_f = mf_next.count_integrators();
    if nu_r == 0 {
        return Err(Error::NoIntegrator { which: "rear" });
    }
    if nu_f == 0 {
        return Err(Error::NoIntegrator { which: "front" });
    }
    let r1 = mr_sigma.integrator_gain();
    let r2 = mf_next.integrator_gain();
    let kaa = match nu_f.cmp(&nu_r) {
        std::cmp::Ordering::Less => 0.0,
        std::cmp::Ordering::Greater => 2.0,
        std::cmp::Ordering::Equal => 2.0 / ((r1 / r2).sqrt() + 1.0),
    };
    Ok(DcGainRecord::from_kaa(kaa, nu_f, nu_r, r1, r2))
}

/// `lim s->0 T_aa(s)` by Richardson extrapolation at `s = 1e-8, 1e-7`.
pub fn soft_kaa_numeric(g: &WaveTf, h: &WaveTf) -> f64 {
    let (g, h) = (g.clone(), h.clone());
    IrrationalBlock::new("T_aa", 0.0, move |s| {
        soft_btf_point(&g.eval_point(s), &h.eval_point(s), s)
            .map(|p| p.aa)
            .unwrap_or(Complex64::new(f64::NAN, 0.0))
    })
    .dc_limit()
}

/// Soft boundaries where `M_r,i != M_f,i+1` and hard ones where
/// `M_f,i != M_r,i`, compared to the transfer-function tolerance.
pub fn detect_boundaries(chain: &ChainSpec) -> Vec<BoundaryLocation> {
    let n = chain.len();
    let mut out = Vec::new();
    for i in 1..=n {
        let a = chain.agent(i);
        if let Some(mr) = a.mr() {
            if i < n && !a.mf().same_model(mr) {
                out.push(BoundaryLocation {
                    kind: BoundaryKind::Hard,
                    index: i,
                });
            }
            if i < n && !mr.same_model(chain.agent(i + 1).mf()) {
                out.push(BoundaryLocation {
                    kind: BoundaryKind::Soft,
                    index: i,
                });
            }
        }
    }
    out
}

/// Sites where a soft and a hard boundary touch. Such combinations are
/// detected but no boundary responses are defined for them.
pub fn combination_sites(locations: &[BoundaryLocation]) -> Vec<usize> {
    let mut out = Vec::new();
    for s in locations.iter().filter(|l| l.kind == BoundaryKind::Soft) {
        let touches = locations.iter().any(|h| {
            h.kind == BoundaryKind::Hard && (h.index == s.index || h.index == s.index + 1)
        });
        if touches {
            out.push(s.index);
        }
    }
    out
}
