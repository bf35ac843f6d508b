//! Wave-absorbing control laws, closed-form chain responses and
//! string-stability verification.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{soft_btf_point, BoundaryKind};
pub use crate::chain::Channel;
use crate::chain::{Absorber, ChainSpec};
use crate::lti::{hinf_norm, FreqGrid, FreqResponse, RationalTf};
use crate::wave::{IrrationalBlock, WavePoint, WaveTf};
use crate::{Error, Result};

/// Signal read by a law term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Source {
    /// Output `X_i` of agent `i` (1-based).
    Agent(usize),
    /// The reference `X_ref`.
    Reference,
}

/// `kernel(s) * source`, with the exact zero-frequency value the kernel's
/// realisation must keep.
#[derive(Debug, Clone)]
pub struct LawTerm {
    pub source: Source,
    pub kernel: IrrationalBlock,
    pub dc_target: f64,
}

/// One absorbing law: the injection on `agent`'s `channel` is the sum of
/// its terms.
#[derive(Debug, Clone)]
pub struct AbsorberLaw {
    pub absorber: Absorber,
    pub agent: usize,
    pub channel: Channel,
    pub terms: Vec<LawTerm>,
}

fn point_block(
    label: &str,
    g: &WaveTf,
    h: Option<&WaveTf>,
    f: impl Fn(WavePoint, WavePoint) -> Complex64 + Send + Sync + 'static,
) -> IrrationalBlock {
    let g = g.clone();
    let h = h.cloned();
    let zero = WavePoint {
        g: Complex64::new(0.0, 0.0),
        one_minus_g: Complex64::new(1.0, 0.0),
        branch_point: false,
    };
    IrrationalBlock::new(label, 0.0, move |s| {
        let hp = h.as_ref().map_or(zero, |h| h.eval_point(s));
        f(g.eval_point(s), hp)
    })
}

/// `lim (1-H)/(1-G)` at DC when both loops have the same number of
/// integrators. `None` leaves the limit to numerics (a zero loop or no
/// integrators); differing counts make the boundary kernels unbounded.
fn u_ratio_dc(mg: &RationalTf, mh: &RationalTf, who: Absorber) -> Result<Option<f64>> {
    if mg.is_zero() || mh.is_zero() {
        return Ok(None);
    }
    let (ng, nh) = (mg.count_integrators(), mh.count_integrators());
    match (ng == nh, ng) {
        (true, 0) => Ok(None),
        (true, _) => Ok(Some((mg.integrator_gain() / mh.integrator_gain()).sqrt())),
        (false, _) => Err(Error::UnsupportedTopology(format!(
            "absorber {who}: loops with {ng} and {nh} integrators give an unbounded law"
        ))),
    }
}

fn finite_dc(block: &IrrationalBlock, exact: Option<f64>, who: Absorber) -> Result<f64> {
    let d = exact.unwrap_or_else(|| block.dc_limit());
    if d.is_finite() && d.abs() < 1e6 {
        Ok(d)
    } else {
        Err(Error::UnsupportedTopology(format!(
            "absorber {who} has no finite zero-frequency gain"
        )))
    }
}

/// Leader law. The first agent's front error sees `X_0 = G X_1 + (1 - G^2) X_ref`
/// in place of `X_ref`, so the injected correction is `G X_1 - G^2 X_ref`.
pub fn leader_absorber(g: &WaveTf) -> AbsorberLaw {
    let g2 = g.clone();
    AbsorberLaw {
        absorber: Absorber::Leader,
        agent: 1,
        channel: Channel::Front,
        terms: vec![
            LawTerm {
                source: Source::Agent(1),
                kernel: IrrationalBlock::from_wave(g),
                dc_target: 1.0,
            },
            LawTerm {
                source: Source::Reference,
                kernel: IrrationalBlock::new("-G^2", 0.0, move |s| {
                    let v = g2.eval(s);
                    -v * v
                }),
                dc_target: -1.0,
            },
        ],
    }
}

/// Rear law on agent `n`: `W_f,N = -G/(1+G) (X_{N-1} - G X_N)`.
pub fn rear_absorber(g: &WaveTf, n: usize) -> AbsorberLaw {
    AbsorberLaw {
        absorber: Absorber::Rear,
        agent: n,
        channel: Channel::Front,
        terms: vec![
            LawTerm {
                source: Source::Agent(n - 1),
                kernel: point_block("-G/(1+G)", g, None, |p, _| -p.g / (1.0 + p.g)),
                dc_target: -0.5,
            },
            LawTerm {
                source: Source::Agent(n),
                kernel: point_block("G^2/(1+G)", g, None, |p, _| p.g * p.g / (1.0 + p.g)),
                dc_target: 0.5,
            },
        ],
    }
}

/// Soft-boundary laws for the boundary between agents `sigma` and
/// `sigma + 1`; `g` is the wave transfer function on the left, `h` on the
/// right. Left: `W_r,sigma = G(G-H)/(1-G^2) (X_{sigma-1} - G X_sigma)`.
/// Right: `W_f,sigma+1 = H(H-G)/(1-H^2) (X_{sigma+2} - H X_{sigma+1})`.
pub fn soft_absorber_pair(
    g: &WaveTf,
    h: &WaveTf,
    sigma: usize,
) -> Result<(AbsorberLaw, AbsorberLaw)> {
    soft_pair_with_models(g, h, g, h, sigma)
}

/// Soft pair where the left law uses `(g, h_left)` and the right law
/// `(g_right, h)`, allowing each side a perturbed model of its neighbour.
fn soft_pair_with_models(
    g: &WaveTf,
    h_left: &WaveTf,
    g_right: &WaveTf,
    h: &WaveTf,
    sigma: usize,
) -> Result<(AbsorberLaw, AbsorberLaw)> {
    let k1 = point_block("G(G-H)/(1-G^2)", g, Some(h_left), |p, q| {
        p.g * (q.one_minus_g - p.one_minus_g) / (p.one_minus_g * (2.0 - p.one_minus_g))
    });
    let d1 = finite_dc(
        &k1,
        u_ratio_dc(g.m(), h_left.m(), Absorber::SoftLeft(sigma))?.map(|r| 0.5 * (r - 1.0)),
        Absorber::SoftLeft(sigma),
    )?;
    let k1b = k1.clone();
    let gg = g.clone();
    let left = AbsorberLaw {
        absorber: Absorber::SoftLeft(sigma),
        agent: sigma,
        channel: Channel::Rear,
        terms: vec![
            LawTerm {
                source: Source::Agent(sigma - 1),
                kernel: k1,
                dc_target: d1,
            },
            LawTerm {
                source: Source::Agent(sigma),
                kernel: IrrationalBlock::new("-G*G(G-H)/(1-G^2)", 0.0, move |s| {
                    -gg.eval(s) * k1b.eval(s)
                }),
                dc_target: -d1,
            },
        ],
    };
    let k3 = point_block("H(H-G)/(1-H^2)", h, Some(g_right), |q, p| {
        q.g * (p.one_minus_g - q.one_minus_g) / (q.one_minus_g * (2.0 - q.one_minus_g))
    });
    let d3 = finite_dc(
        &k3,
        u_ratio_dc(h.m(), g_right.m(), Absorber::SoftRight(sigma))?.map(|r| 0.5 * (r - 1.0)),
        Absorber::SoftRight(sigma),
    )?;
    let k3b = k3.clone();
    let hh = h.clone();
    let right = AbsorberLaw {
        absorber: Absorber::SoftRight(sigma),
        agent: sigma + 1,
        channel: Channel::Front,
        terms: vec![
            LawTerm {
                source: Source::Agent(sigma + 2),
                kernel: k3,
                dc_target: d3,
            },
            LawTerm {
                source: Source::Agent(sigma + 1),
                kernel: IrrationalBlock::new("-H*H(H-G)/(1-H^2)", 0.0, move |s| {
                    -hh.eval(s) * k3b.eval(s)
                }),
                dc_target: -d3,
            },
        ],
    };
    Ok((left, right))
}

/// Hard-boundary laws on agent `eta`; `g` from its front open loop, `h`
/// from its rear one.
/// Left: `W_f,eta = (H-G)/((1+G)(1-H)) (X_{eta-1} - G X_eta)`.
/// Right: `W_r,eta = (G-H)/((1+H)(1-G)) (X_{eta+1} - H X_eta)`.
pub fn hard_absorber_pair(
    g: &WaveTf,
    h: &WaveTf,
    eta: usize,
) -> Result<(AbsorberLaw, AbsorberLaw)> {
    hard_pair_with_models(g, h, g, h, eta)
}

fn hard_pair_with_models(
    g: &WaveTf,
    h_left: &WaveTf,
    g_right: &WaveTf,
    h: &WaveTf,
    eta: usize,
) -> Result<(AbsorberLaw, AbsorberLaw)> {
    Ok((
        hard_left_law(g, h_left, eta)?,
        hard_right_law(g_right, h, eta)?,
    ))
}

fn hard_left_law(g: &WaveTf, h: &WaveTf, eta: usize) -> Result<AbsorberLaw> {
    let who = Absorber::Hard(eta);
    let kl = point_block("(H-G)/((1+G)(1-H))", g, Some(h), |p, q| {
        (p.one_minus_g - q.one_minus_g) / ((2.0 - p.one_minus_g) * q.one_minus_g)
    });
    let dl = finite_dc(
        &kl,
        u_ratio_dc(g.m(), h.m(), who)?.map(|r| 0.5 * (1.0 / r - 1.0)),
        who,
    )?;
    let (klb, gg) = (kl.clone(), g.clone());
    Ok(AbsorberLaw {
        absorber: who,
        agent: eta,
        channel: Channel::Front,
        terms: vec![
            LawTerm {
                source: Source::Agent(eta - 1),
                kernel: kl,
                dc_target: dl,
            },
            LawTerm {
                source: Source::Agent(eta),
                kernel: IrrationalBlock::new("-G*KL", 0.0, move |s| -gg.eval(s) * klb.eval(s)),
                dc_target: -dl,
            },
        ],
    })
}

fn hard_right_law(g: &WaveTf, h: &WaveTf, eta: usize) -> Result<AbsorberLaw> {
    let who = Absorber::Hard(eta);
    let kr = point_block("(G-H)/((1+H)(1-G))", h, Some(g), |q, p| {
        (q.one_minus_g - p.one_minus_g) / ((2.0 - q.one_minus_g) * p.one_minus_g)
    });
    let dr = finite_dc(
        &kr,
        u_ratio_dc(h.m(), g.m(), who)?.map(|r| 0.5 * (1.0 / r - 1.0)),
        who,
    )?;
    let (krb, hh) = (kr.clone(), h.clone());
    Ok(AbsorberLaw {
        absorber: who,
        agent: eta,
        channel: Channel::Rear,
        terms: vec![
            LawTerm {
                source: Source::Agent(eta + 1),
                kernel: kr,
                dc_target: dr,
            },
            LawTerm {
                source: Source::Agent(eta),
                kernel: IrrationalBlock::new("-H*KR", 0.0, move |s| -hh.eval(s) * krb.eval(s)),
                dc_target: -dr,
            },
        ],
    })
}

/// All laws requested by the chain's absorber set.
pub fn synthesize(chain: &ChainSpec) -> Result<Vec<AbsorberLaw>> {
    let n = chain.len();
    let perturbed = |m: &RationalTf| WaveTf::new(m.scale(1.0 + chain.mismatch));
    let mut laws = Vec::new();
    for &a in chain.absorbers() {
        match a {
            Absorber::Leader => {
                laws.push(leader_absorber(&WaveTf::new(chain.agent(1).mf().clone())))
            }
            Absorber::Rear => {
                if n < 2 {
                    return Err(Error::UnsupportedTopology(
                        "rear absorber needs two agents".into(),
                    ));
                }
                laws.push(rear_absorber(&WaveTf::new(chain.agent(n).mf().clone()), n));
            }
            Absorber::SoftLeft(s) | Absorber::SoftRight(s) => {
                let mg = chain.rear_loop(s).expect("validated soft site");
                let mh = chain.agent(s + 1).mf();
                let (g, h) = (WaveTf::new(mg.clone()), WaveTf::new(mh.clone()));
                let (left, right) =
                    soft_pair_with_models(&g, &perturbed(mh), &perturbed(mg), &h, s)?;
                laws.push(if matches!(a, Absorber::SoftLeft(_)) {
                    left
                } else {
                    right
                });
            }
            Absorber::Hard(e) => {
                let mg = chain.agent(e).mf();
                let mh = chain.rear_loop(e).expect("validated hard site");
                let (g, h) = (WaveTf::new(mg.clone()), WaveTf::new(mh.clone()));
                let (left, right) =
                    hard_pair_with_models(&g, &perturbed(mh), &perturbed(mg), &h, e)?;
                laws.push(left);
                laws.push(right);
            }
        }
    }
    Ok(laws)
}

/// `|F - (G - H)|` where `F = -T_ab/(T_r (1 + T_ab))` and
/// `T_r = M/(1 + 2(1-G)M)` is the response of a homogeneous agent with
/// open loop `M` (WTF `G`) to its rear injection.
pub fn soft_synthesis_residual(mg: &RationalTf, mh: &RationalTf, s: Complex64) -> Result<f64> {
    let (g, h) = (
        WaveTf::new(mg.clone()).eval_point(s),
        WaveTf::new(mh.clone()).eval_point(s),
    );
    let t = soft_btf_point(&g, &h, s)?;
    let m = mg.eval(s)?;
    let tr = m / (1.0 + 2.0 * g.one_minus_g * m);
    let f = -t.ab / (tr * (1.0 + t.ab));
    Ok((f - (g.g - h.g)).norm())
}

/// Chain configurations with a printed closed-form response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClosedFormTopology {
    /// Only the leader absorber at the ends.
    LeaderOnly,
    /// Rear absorber, with or without the leader one.
    RearOrBoth,
    /// No end absorber.
    NoEndAbsorber,
}

/// `X_p/X_ref` for a chain of `n` agents whose first `sigma` agents have
/// WTF `g` and the rest `h`, with any soft boundary absorbed.
pub fn closed_form_value(
    topo: ClosedFormTopology,
    g: Complex64,
    h: Complex64,
    sigma: usize,
    n: usize,
    p: usize,
) -> Complex64 {
    let pw = |z: Complex64, k: usize| z.powi(k as i32);
    let (sg, nn) = (sigma, n);
    let far = pw(g, 2 * sg + 1) * pw(h, 2 * (nn - sg));
    let num = if p <= sg {
        (pw(g, p), pw(g, 2 * sg + 1 - p) * pw(h, 2 * (nn - sg)))
    } else {
        (
            pw(g, sg) * pw(h, p - sg),
            pw(g, sg) * pw(h, 2 * nn + 1 - sg - p),
        )
    };
    match topo {
        ClosedFormTopology::LeaderOnly => num.0 + num.1,
        ClosedFormTopology::RearOrBoth => num.0,
        ClosedFormTopology::NoEndAbsorber => (num.0 + num.1) / (1.0 + far),
    }
}

/// Topology, boundary site and segment WTFs of a chain that admits a
/// closed form. Homogeneous chains use `sigma = N` and `H = G`.
#[derive(Debug, Clone)]
pub struct ClosedFormSetup {
    pub topology: ClosedFormTopology,
    pub sigma: usize,
    pub g: WaveTf,
    pub h: WaveTf,
}

pub fn closed_form_setup(chain: &ChainSpec) -> Result<ClosedFormSetup> {
    let n = chain.len();
    let unsupported = |why: &str| Err(Error::UnsupportedTopology(why.to_string()));
    if chain
        .boundaries()
        .iter()
        .any(|b| b.kind == BoundaryKind::Hard)
    {
        return unsupported("closed forms cover soft boundaries only");
    }
    let soft: Vec<usize> = chain.boundaries().iter().map(|b| b.index).collect();
    let sigma = match soft.as_slice() {
        [] => n,
        [s] => {
            if !(chain.has_absorber(Absorber::SoftLeft(*s))
                && chain.has_absorber(Absorber::SoftRight(*s)))
            {
                return unsupported("closed forms need the soft boundary absorbed on both sides");
            }
            *s
        }
        _ => return unsupported("closed forms cover a single soft boundary"),
    };
    let g = WaveTf::new(chain.agent(1).mf().clone());
    let h = if sigma < n {
        WaveTf::new(chain.agent(n).mf().clone())
    } else {
        g.clone()
    };
    for i in 1..=n {
        let want = if i <= sigma { g.m() } else { h.m() };
        let a = chain.agent(i);
        let rear_ok = chain.rear_loop(i).is_none_or(|m| m.same_model(want));
        if !a.mf().same_model(want) || !rear_ok {
            return unsupported("closed forms need two homogeneous segments");
        }
    }
    if chain.mismatch != 0.0 {
        return unsupported("closed forms assume exactly matched absorbers");
    }
    let topology = match (
        chain.has_absorber(Absorber::Leader),
        chain.has_absorber(Absorber::Rear),
    ) {
        (_, true) => ClosedFormTopology::RearOrBoth,
        (true, false) => ClosedFormTopology::LeaderOnly,
        (false, false) => ClosedFormTopology::NoEndAbsorber,
    };
    Ok(ClosedFormSetup {
        topology,
        sigma,
        g,
        h,
    })
}

/// Closed-form `X_p/X_ref` of the chain on a frequency grid.
pub fn closed_form_chain(chain: &ChainSpec, grid: &FreqGrid, p: usize) -> Result<FreqResponse> {
    let cf = closed_form_setup(chain)?;
    let n = chain.len();
    if p == 0 || p > n {
        return Err(Error::DimensionMismatch(format!(
            "agent {p} outside 1..={n}"
        )));
    }
    Ok(FreqResponse::from_fn(grid, |w| {
        let s = Complex64::new(0.0, w);
        closed_form_value(cf.topology, cf.g.eval(s), cf.h.eval(s), cf.sigma, n, p)
    }))
}

/// Largest H-infinity norm of `X_i/X_ref` per chain length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StringStabilityVerdict {
    /// `(N, i, norm)` triples.
    pub norms: Vec<(usize, usize, f64)>,
    pub bound: f64,
    pub max_norm: f64,
    pub verdict: bool,
}

/// Default bound for absorber-equipped chains.
pub const STRING_STABILITY_BOUND: f64 = 1.0 + 1e-6;

/// Evaluates the closed-form responses of `family(N)` for every `N` and
/// agent and compares their H-infinity norms with `bound`.
pub fn string_stability_check(
    family: impl Fn(usize) -> Result<ChainSpec> + Sync,
    n_list: &[usize],
    grid: &FreqGrid,
    bound: f64,
) -> Result<StringStabilityVerdict> {
    let setups: Vec<(usize, ClosedFormSetup)> = n_list
        .iter()
        .map(|&n| Ok((n, closed_form_setup(&family(n)?)?)))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize, &ClosedFormSetup)> = setups
        .iter()
        .flat_map(|(n, cf)| (1..=*n).map(move |p| (*n, p, cf)))
        .collect();
    let norms: Vec<(usize, usize, f64)> = jobs
        .par_iter()
        .map(|&(n, p, cf)| {
            let norm = hinf_norm(
                |w| {
                    let s = Complex64::new(0.0, w);
                    closed_form_value(cf.topology, cf.g.eval(s), cf.h.eval(s), cf.sigma, n, p)
                },
                grid,
            );
            (n, p, norm)
        })
        .collect();
    let max_norm = norms.iter().fold(0.0_f64, |m, t| m.max(t.2));
    Ok(StringStabilityVerdict {
        norms,
        bound,
        max_norm,
        verdict: max_norm <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::AgentSpec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn m1() -> RationalTf {
        RationalTf::from_coeffs(&[4.0, 4.0], &[0.0, 0.0, 4.0, 1.0]).unwrap()
    }

    fn m2() -> RationalTf {
        RationalTf::from_coeffs(&[1.0, 1.0], &[0.0, 0.0, 3.0, 1.0]).unwrap()
    }

    fn eval_terms(law: &AbsorberLaw, s: Complex64) -> Vec<Complex64> {
        law.terms.iter().map(|t| t.kernel.eval(s)).collect()
    }

    #[test]
    fn identical_sides_give_zero_laws() {
        let g = WaveTf::new(m1());
        let (l, r) = soft_absorber_pair(&g, &g, 3).unwrap();
        let (hl, hr) = hard_absorber_pair(&g, &g, 3).unwrap();
        for law in [&l, &r, &hl, &hr] {
            for v in eval_terms(law, c(0.1, 0.8)) {
                assert!(v.norm() < 1e-15);
            }
            for t in &law.terms {
                assert!(t.dc_target.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn hard_left_law_with_h_zero_is_rear_law() {
        let g = WaveTf::new(m1());
        let zero = WaveTf::new(RationalTf::zero());
        let left = hard_left_law(&g, &zero, 4).unwrap();
        let rear = rear_absorber(&g, 4);
        let s = c(0.05, 1.7);
        // the rear law reads (X_{N-1}, X_N) with kernels (K, -G K)
        let a = eval_terms(&left, s);
        let b = eval_terms(&rear, s);
        assert!((a[0] - b[0]).norm() < 1e-14 && (a[1] - b[1]).norm() < 1e-14);
    }

    #[test]
    fn zero_wave_gives_zero_rear_correction() {
        let rear = rear_absorber(&WaveTf::new(RationalTf::zero()), 3);
        for v in eval_terms(&rear, c(0.0, 2.0)) {
            assert_eq!(v, c(0.0, 0.0));
        }
    }

    #[test]
    fn synthesis_identity_on_grid() {
        let grid = FreqGrid::log_spaced(1e-2, 1e2, 100).unwrap();
        for &w in grid.omegas() {
            let r = soft_synthesis_residual(&m1(), &m2(), c(0.0, w)).unwrap();
            assert!(r < 1e-9, "omega {w}: {r}");
        }
    }

    #[test]
    fn law_dc_targets_match_numeric_limits() {
        let (g, h) = (WaveTf::new(m1()), WaveTf::new(m2()));
        let (l, r) = soft_absorber_pair(&g, &h, 4).unwrap();
        let (hl, hr) = hard_absorber_pair(&g, &h, 4).unwrap();
        for law in [&l, &r, &hl, &hr] {
            for t in &law.terms {
                assert!(
                    (t.kernel.dc_limit() - t.dc_target).abs() < 1e-5,
                    "{}",
                    t.kernel.label()
                );
            }
        }
        let lead = leader_absorber(&g);
        assert!((lead.terms[1].kernel.dc_limit() + 1.0).abs() < 1e-6);
    }

    #[test]
    fn unequal_integrators_rejected() {
        let one = RationalTf::from_coeffs(&[1.0], &[0.0, 1.0, 1.0]).unwrap();
        let r = soft_absorber_pair(&WaveTf::new(m1()), &WaveTf::new(one), 3);
        assert!(matches!(r, Err(Error::UnsupportedTopology(_))));
    }

    #[test]
    fn branch_formulas_agree_at_sigma() {
        let (g, h) = (c(0.3, -0.5), c(0.6, 0.1));
        let (sg, n) = (4, 9);
        let left = closed_form_value(ClosedFormTopology::RearOrBoth, g, h, sg, n, sg);
        // the p > sigma branch G^sigma H^(p - sigma) at p = sigma
        let right = g.powi(sg as i32) * h.powi(0);
        assert!((left - right).norm() < 1e-15);
    }

    #[test]
    fn worked_example_first_agents() {
        let (g, h) = (c(0.7, -0.2), c(0.4, 0.3));
        let x1 = closed_form_value(ClosedFormTopology::NoEndAbsorber, g, h, 3, 5, 1);
        let want = (g + g.powi(6) * h.powi(4)) / (1.0 + g.powi(7) * h.powi(4));
        assert!((x1 - want).norm() < 1e-15);
        let x2 = closed_form_value(ClosedFormTopology::NoEndAbsorber, g, h, 3, 5, 2);
        let want2 = (g.powi(2) + g.powi(5) * h.powi(4)) / (1.0 + g.powi(7) * h.powi(4));
        assert!((x2 - want2).norm() < 1e-15);
    }

    #[test]
    fn single_agent_chain_is_unity_feedback() {
        let chain = ChainSpec::new(vec![AgentSpec::symmetric(m1())], vec![]).unwrap();
        let grid = FreqGrid::log_spaced(1e-2, 1e2, 50).unwrap();
        let fr = closed_form_chain(&chain, &grid, 1).unwrap();
        for (k, &w) in grid.omegas().iter().enumerate() {
            let m = m1().eval(c(0.0, w)).unwrap();
            assert!((fr.channels[0][k] - m / (1.0 + m)).norm() < 1e-9);
        }
    }

    #[test]
    fn hard_boundary_has_no_closed_form() {
        let mut agents = vec![AgentSpec::symmetric(m1()); 2];
        agents.push(AgentSpec::from_loops(m1(), Some(m2())));
        agents.push(AgentSpec::symmetric(m2()));
        let chain = ChainSpec::new(agents, vec![]).unwrap();
        assert!(matches!(
            closed_form_setup(&chain),
            Err(Error::UnsupportedTopology(_))
        ));
    }
}
