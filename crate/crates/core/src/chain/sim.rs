use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::assemble::{assemble_chain_ss, ChainSystem};
use super::spec::{Absorber, ChainSpec, Channel, Reference};
use crate::absorber::{synthesize, AbsorberLaw, Source};
use crate::wave::{wave_fir, FirKernel, FirOptions, IltOptions};
use crate::{Error, Result};

/// Output magnitude treated as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Time-simulation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub dt: f64,
    pub t_final: f64,
    /// Kernel horizon in seconds; `None` uses `t_final`.
    pub fir_horizon: Option<f64>,
    /// Tail-energy bound applied when the horizon is shorter than the run.
    pub tail_bound: f64,
    pub ilt: IltOptions,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_final: 60.0,
            fir_horizon: None,
            tail_bound: 1e-4,
            ilt: IltOptions::default(),
        }
    }
}

impl SimOptions {
    pub fn new(t_final: f64, dt: f64) -> Self {
        Self {
            dt,
            t_final,
            ..Self::default()
        }
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize + 1
    }
}

/// One law term realised as an FIR kernel.
#[derive(Debug, Clone, Serialize)]
pub struct RealisedTerm {
    #[serde(skip)]
    pub source: Source,
    pub kernel: FirKernel,
    /// The input is piecewise constant between samples, so its samples are
    /// exact and the kernel carries no half-step compensation.
    pub exact_input: bool,
}

#[derive(Debug, Clone)]
pub struct RealisedLaw {
    pub absorber: Absorber,
    pub agent: usize,
    pub channel: Channel,
    pub terms: Vec<RealisedTerm>,
}

/// Samples every law term into an FIR kernel keeping its exact DC target.
/// Kernels reading agent outputs take taps half a step late so that, once
/// held, their output lines up with the continuous one. Kernels reading a
/// piecewise-constant reference use unshifted taps; a shifted kernel there
/// moves the mean delay by half a step, which in the leader loop shows up
/// as a steady-state error proportional to `dt`.
pub fn realise_laws(
    laws: &[AbsorberLaw],
    reference: &Reference,
    opts: &SimOptions,
) -> Result<Vec<RealisedLaw>> {
    let exact_ref = !matches!(reference, Reference::Ramp { .. });
    let horizon = opts.fir_horizon.unwrap_or(opts.t_final);
    let tail_bound = if horizon >= opts.t_final {
        f64::INFINITY
    } else {
        opts.tail_bound
    };
    let jobs: Vec<(usize, usize)> = laws
        .iter()
        .enumerate()
        .flat_map(|(l, law)| (0..law.terms.len()).map(move |t| (l, t)))
        .collect();
    let kernels: Vec<FirKernel> = jobs
        .par_iter()
        .map(|&(l, t)| {
            let term = &laws[l].terms[t];
            let exact = exact_ref && term.source == Source::Reference;
            let fo = FirOptions {
                offset: if exact { 0.0 } else { 0.5 },
                dc_target: Some(term.dc_target),
                tail_bound,
                ilt: opts.ilt.clone(),
            };
            wave_fir(&term.kernel, opts.dt, horizon, &fo)
        })
        .collect::<Result<_>>()?;
    let mut it = kernels.into_iter();
    Ok(laws
        .iter()
        .map(|law| RealisedLaw {
            absorber: law.absorber,
            agent: law.agent,
            channel: law.channel,
            terms: law
                .terms
                .iter()
                .map(|t| RealisedTerm {
                    source: t.source,
                    kernel: it.next().unwrap(),
                    exact_input: exact_ref && t.source == Source::Reference,
                })
                .collect(),
        })
        .collect())
}

/// Recorded closed-loop run. Index `i - 1` holds agent `i`.
#[derive(Debug, Clone, Serialize)]
pub struct SimulationResult {
    pub dt: f64,
    pub t: Vec<f64>,
    pub x_ref: Vec<f64>,
    /// Effective reference seen by agent 1, `X_ref + W_f,1`.
    pub x0: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub wf: Vec<Vec<f64>>,
    pub wr: Vec<Vec<f64>>,
    /// Longest realised kernel, in taps.
    pub max_kernel_len: usize,
}

impl SimulationResult {
    pub fn n_agents(&self) -> usize {
        self.x.len()
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Simulates the chain with its absorbers realised as FIR kernels.
pub fn simulate(chain: &ChainSpec, opts: &SimOptions) -> Result<SimulationResult> {
    let laws = realise_laws(&synthesize(chain)?, &chain.reference, opts)?;
    simulate_with_laws(chain, &laws, opts)
}

/// Zero-order-hold simulation of the assembled chain with the given
/// realised laws closing the injection loops.
pub fn simulate_with_laws(
    chain: &ChainSpec,
    laws: &[RealisedLaw],
    opts: &SimOptions,
) -> Result<SimulationResult> {
    if !(opts.dt > 0.0) || !(opts.t_final > 0.0) {
        return Err(Error::DimensionMismatch(format!(
            "bad horizon {} / step {}",
            opts.t_final, opts.dt
        )));
    }
    let sys = assemble_chain_ss(chain)?;
    let n = sys.n;
    let input_of = |agent: usize, ch: Channel| match ch {
        Channel::Front => sys.input_wf(agent),
        Channel::Rear => sys.input_wr(agent),
    };
    // active inputs: x_ref and every driven injection channel
    let mut active = vec![ChainSystem::INPUT_REF];
    for idx in laws.iter().map(|l| input_of(l.agent, l.channel)).chain(
        chain
            .injections
            .iter()
            .map(|j| input_of(j.agent, j.channel)),
    ) {
        if !active.contains(&idx) {
            active.push(idx);
        }
    }
    for (col, &inp) in active.iter().enumerate().skip(1) {
        for i in 0..n {
            if sys.ss.d[(i, inp)] != 0.0 {
                return Err(Error::Agent {
                    agent: i + 1,
                    reason: format!("output feeds through from injection input {inp} (column {col}); absorber loop is algebraic"),
                });
            }
        }
    }
    let disc = sys.ss.discretize(opts.dt, &active);
    let steps = opts.n_steps();
    let t: Vec<f64> = (0..steps).map(|k| k as f64 * opts.dt).collect();
    let x_ref: Vec<f64> = t.iter().map(|&tk| chain.reference.value(tk)).collect();
    let mut x = vec![vec![0.0; steps]; n];
    let mut u = vec![vec![0.0; steps]; n];
    let mut inj = vec![vec![0.0; steps]; active.len()];
    let mut state = DVector::zeros(disc.ad.nrows());
    let cx = disc.c.rows(0, n).clone_owned();
    let dx_ref = disc.d.view((0, 0), (n, 1)).clone_owned();
    for k in 0..steps {
        let xk = &cx * &state + &dx_ref * x_ref[k];
        for i in 0..n {
            x[i][k] = xk[i];
        }
        let mut uk = DVector::zeros(active.len());
        uk[0] = x_ref[k];
        for law in laws {
            let col = active
                .iter()
                .position(|&a| a == input_of(law.agent, law.channel))
                .unwrap();
            let mut v = 0.0;
            for term in &law.terms {
                let hist = match term.source {
                    Source::Agent(j) => &x[j - 1],
                    Source::Reference => &x_ref,
                };
                v += term.kernel.output_at(hist, k);
            }
            uk[col] += v;
        }
        for j in &chain.injections {
            let col = active
                .iter()
                .position(|&a| a == input_of(j.agent, j.channel))
                .unwrap();
            uk[col] += j.signal.value(t[k]);
        }
        for (c, v) in uk.iter().enumerate() {
            inj[c][k] = *v;
        }
        let z = disc.output(&state, &uk);
        for i in 0..n {
            u[i][k] = z[n + i];
        }
        if z.iter()
            .any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT)
        {
            return Err(Error::Divergence { t: t[k] });
        }
        state = disc.step(&state, &uk);
    }
    let mut wf = vec![vec![0.0; steps]; n];
    let mut wr = vec![vec![0.0; steps]; n];
    for (c, &inp) in active.iter().enumerate().skip(1) {
        if inp <= n {
            wf[inp - 1] = inj[c].clone();
        } else {
            wr[inp - n - 1] = inj[c].clone();
        }
    }
    let x0 = x_ref.iter().zip(&wf[0]).map(|(r, w)| r + w).collect();
    let max_kernel_len = laws
        .iter()
        .flat_map(|l| l.terms.iter().map(|t| t.kernel.len()))
        .max()
        .unwrap_or(0);
    Ok(SimulationResult {
        dt: opts.dt,
        t,
        x_ref,
        x0,
        x,
        u,
        wf,
        wr,
        max_kernel_len,
    })
}

/// `X(s)/X_ref(s)` of the sampled-data loop: the chain's continuous
/// transfer matrix closed through the held FIR kernels.
pub fn realised_response_at(
    chain: &ChainSpec,
    sys: &ChainSystem,
    laws: &[RealisedLaw],
    s: Complex64,
) -> Result<Vec<Complex64>> {
    let n = chain.len();
    let t = sys.ss.eval(s)?;
    let zero = Complex64::new(0.0, 0.0);
    // W = K X + k_ref X_ref, X = T_r X_ref + T_w W
    let mut tw_k = DMatrix::from_element(n, n, zero);
    let mut rhs = DVector::from_fn(n, |i, _| t[(i, 0)]);
    for law in laws {
        let inp = match law.channel {
            Channel::Front => sys.input_wf(law.agent),
            Channel::Rear => sys.input_wr(law.agent),
        };
        for term in &law.terms {
            let k = if term.exact_input {
                term.kernel.transform(s)
            } else {
                term.kernel.held_response(s)
            };
            for i in 0..n {
                let c = t[(i, inp)] * k;
                match term.source {
                    Source::Agent(j) => tw_k[(i, j - 1)] += c,
                    Source::Reference => rhs[i] += c,
                }
            }
        }
    }
    let m = DMatrix::identity(n, n) - tw_k;
    let x = m.lu().solve(&rhs).ok_or(Error::SingularDenominator { s })?;
    Ok(x.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{chain_response_at, AgentSpec, HardSign, Injection};
    use crate::lti::RationalTf;
    use crate::wave::ilt_response;

    fn m1() -> RationalTf {
        RationalTf::from_coeffs(&[4.0, 4.0], &[0.0, 0.0, 4.0, 1.0]).unwrap()
    }

    #[test]
    fn zero_reference_gives_zero_traces() {
        let chain = ChainSpec::new(
            vec![AgentSpec::symmetric(m1()); 3],
            vec![Absorber::Leader, Absorber::Rear],
        )
        .unwrap()
        .with_reference(Reference::Step { amplitude: 0.0 });
        let r = simulate(&chain, &SimOptions::new(5.0, 0.01)).unwrap();
        assert!(r.x.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn plain_chain_matches_inverse_laplace() {
        let chain = ChainSpec::new(vec![AgentSpec::symmetric(m1()); 3], vec![]).unwrap();
        let r = simulate(&chain, &SimOptions::new(20.0, 0.01)).unwrap();
        let sys = assemble_chain_ss(&chain).unwrap();
        let want = ilt_response(
            |s| sys.ss.eval(s).unwrap()[(2, 0)] / s,
            25.0,
            0.01,
            &IltOptions::default(),
        )
        .unwrap()
        .channel(0);
        let err = (0..2000)
            .map(|k| (r.x[2][k] - want[k]).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn absorbed_chain_tracks_exact_response() {
        let chain = ChainSpec::new(
            vec![AgentSpec::symmetric(m1()); 4],
            vec![Absorber::Leader, Absorber::Rear],
        )
        .unwrap();
        let opts = SimOptions::new(30.0, 0.01);
        let laws = synthesize(&chain).unwrap();
        let r = simulate(&chain, &opts).unwrap();
        let want = ilt_response(
            |s| chain_response_at(&chain, &laws, s, HardSign::Consistent).unwrap()[3] / s,
            40.0,
            0.01,
            &IltOptions::default(),
        )
        .unwrap()
        .channel(0);
        let err = (0..3000)
            .map(|k| (r.x[3][k] - want[k]).abs())
            .fold(0.0, f64::max);
        assert!(err < 5e-3, "{err}");
        let last = *r.x[3].last().unwrap();
        assert!((last - 1.0).abs() < 1e-3, "{last}");
    }

    #[test]
    fn realised_loop_close_to_exact() {
        let chain = ChainSpec::new(
            vec![AgentSpec::symmetric(m1()); 4],
            vec![Absorber::Leader, Absorber::Rear],
        )
        .unwrap();
        let opts = SimOptions::new(40.0, 0.01);
        let exact = synthesize(&chain).unwrap();
        let laws = realise_laws(&exact, &chain.reference, &opts).unwrap();
        let sys = assemble_chain_ss(&chain).unwrap();
        for w in [0.2, 1.0, 3.0] {
            let s = Complex64::new(0.0, w);
            let a = realised_response_at(&chain, &sys, &laws, s).unwrap();
            let b = chain_response_at(&chain, &exact, s, HardSign::Consistent).unwrap();
            for i in 0..4 {
                assert!(
                    (a[i] - b[i]).norm() < 1e-3,
                    "w {w} agent {}: {}",
                    i + 1,
                    (a[i] - b[i]).norm()
                );
            }
        }
    }

    #[test]
    fn injection_moves_the_chain() {
        let chain = ChainSpec::new(vec![AgentSpec::symmetric(m1()); 3], vec![])
            .unwrap()
            .with_reference(Reference::Step { amplitude: 0.0 })
            .with_injection(Injection {
                agent: 2,
                channel: Channel::Rear,
                signal: Reference::unit_step(),
            })
            .unwrap();
        let r = simulate(&chain, &SimOptions::new(5.0, 0.01)).unwrap();
        assert!(r.x[1][400].abs() > 1e-2);
        assert_eq!(r.wr[1][10], 1.0);
    }

    #[test]
    fn unstable_loop_diverges() {
        let bad = RationalTf::from_coeffs(&[-1.0], &[-1.0, 1.0]).unwrap();
        let chain = ChainSpec::new(vec![AgentSpec::symmetric(bad); 2], vec![]).unwrap();
        let r = simulate(&chain, &SimOptions::new(200.0, 0.01));
        assert!(matches!(r, Err(Error::Divergence { .. })), "{r:?}");
    }
}
