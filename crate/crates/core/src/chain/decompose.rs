use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use super::sim::SimulationResult;
use super::spec::{Absorber, ChainSpec, Channel};
use crate::wave::{WaveTf, TRUSTED_FRACTION};
use crate::{Error, Result};

/// How an agent's wave pair was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecompositionRule {
    /// `A` from the left neighbour, `B` from the right one.
    BothSides,
    /// `A` from the left neighbour, `B = X - A`.
    Left,
    /// `B` from the right neighbour, `A = X - B`.
    Right,
    /// Hard-boundary agent with separate left and right pairs.
    Hard,
}

/// Left and right wave pairs of a hard-boundary agent.
#[derive(Debug, Clone, Serialize)]
pub struct HardWaves {
    pub a_l: Vec<f64>,
    pub b_l: Vec<f64>,
    pub a_r: Vec<f64>,
    pub b_r: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AgentWaves {
    pub agent: usize,
    pub rule: DecompositionRule,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Relative L2 norm of `x - (a + b)` on the trusted window.
    pub residual: f64,
    pub hard: Option<HardWaves>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WaveDecomposition {
    pub dt: f64,
    /// Samples before this index are trusted.
    pub trusted_len: usize,
    pub x0: Vec<f64>,
    pub a0: Vec<f64>,
    pub b0: Vec<f64>,
    pub agents: Vec<AgentWaves>,
}

impl WaveDecomposition {
    pub fn max_residual(&self) -> f64 {
        self.agents.iter().fold(0.0, |m, a| m.max(a.residual))
    }
}

/// Damped-FFT filtering of sampled signals: spectra are taken at
/// `s = c + j omega_k` and products with irrational kernels are inverted
/// back to samples.
struct Spectral {
    n: usize,
    dt: f64,
    c: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    s: Vec<Complex64>,
}

impl Spectral {
    fn new(n: usize, dt: f64) -> Self {
        let len = (8 * n).next_power_of_two();
        let t = n as f64 * dt;
        let c = 2.0 / t;
        let mut planner = FftPlanner::new();
        let w0 = 2.0 * std::f64::consts::PI / (len as f64 * dt);
        let s = (0..=len / 2)
            .map(|k| Complex64::new(c, w0 * k as f64))
            .collect();
        Self {
            n,
            dt,
            c,
            fwd: planner.plan_fft_forward(len),
            inv: planner.plan_fft_inverse(len),
            s,
        }
    }

    fn len(&self) -> usize {
        self.fwd.len()
    }

    fn forward(&self, y: &[f64]) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len()];
        for (k, v) in y.iter().enumerate().take(self.n) {
            let w = if k == 0 { 0.5 } else { 1.0 };
            buf[k] = Complex64::new(w * v * (-self.c * k as f64 * self.dt).exp(), 0.0);
        }
        self.fwd.process(&mut buf);
        buf
    }

    /// Applies a strictly proper `kernel` given on the non-negative half of
    /// the spectrum. The first input sample carries trapezoid weight one
    /// half, so step-like inputs are integrated to second order.
    fn filter(&self, spec: &[Complex64], kernel: &[Complex64]) -> Vec<f64> {
        let len = self.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for k in 0..=len / 2 {
            buf[k] = spec[k] * kernel[k];
        }
        for k in len / 2 + 1..len {
            buf[k] = spec[k] * kernel[len - k].conj();
        }
        self.inv.process(&mut buf);
        (0..self.n)
            .map(|k| buf[k].re / len as f64 * (self.c * k as f64 * self.dt).exp())
            .collect()
    }
}

fn rel_l2(x: &[f64], y: &[f64], n: usize) -> f64 {
    let num: f64 = x[..n]
        .iter()
        .zip(&y[..n])
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let den: f64 = x[..n].iter().map(|a| a * a).sum();
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}

/// Splits every agent output into forward and backward travelling parts.
///
/// Agent `i` with WTF `G` of its front loop gets
/// `A_i = G/(1-G^2) (X_{i-1} - G X_i)` with `X_0` the effective reference,
/// and with WTF `G` of its rear loop `B_i = G/(1-G^2) (X_{i+1} - G X_i)`.
/// Which formulas apply depends on the neighbour links and injected laws.
pub fn wave_decompose(chain: &ChainSpec, sim: &SimulationResult) -> Result<WaveDecomposition> {
    let n_ag = chain.len();
    if sim.n_agents() != n_ag {
        return Err(Error::DimensionMismatch(format!(
            "{} traces for {n_ag} agents",
            sim.n_agents()
        )));
    }
    let n = sim.len();
    if n < 2 {
        return Err(Error::DimensionMismatch(
            "trace too short to decompose".into(),
        ));
    }
    let sp = Spectral::new(n, sim.dt);
    let mut inputs: Vec<&[f64]> = vec![&sim.x0];
    inputs.extend(sim.x.iter().map(Vec::as_slice));
    let spectra: Vec<Vec<Complex64>> = inputs.par_iter().map(|y| sp.forward(y)).collect();
    let trusted_len = ((TRUSTED_FRACTION * (n - 1) as f64).floor() as usize + 1).min(n);

    let injected = |i: usize, ch: Channel| {
        chain.absorbers().iter().any(|&a| match a {
            Absorber::SoftLeft(s) => ch == Channel::Rear && s == i,
            Absorber::SoftRight(s) => ch == Channel::Front && s + 1 == i,
            Absorber::Rear => ch == Channel::Front && i == n_ag,
            Absorber::Hard(e) => e == i,
            Absorber::Leader => false,
        }) || chain
            .injections
            .iter()
            .any(|j| j.agent == i && j.channel == ch)
    };
    let left_ok = |i: usize| {
        i == 1
            || chain
                .rear_loop(i - 1)
                .is_some_and(|m| m.same_model(chain.agent(i).mf()))
    };
    let right_ok = |i: usize| {
        i < n_ag
            && chain
                .rear_loop(i)
                .is_some_and(|m| m.same_model(chain.agent(i + 1).mf()))
    };

    // A_i (left) or B_i (right) formula for agent i using `wtf`
    let side = |i: usize, wtf: &WaveTf, neighbour: usize| -> Vec<f64> {
        let kern_n: Vec<Complex64> =
            sp.s.iter()
                .map(|&s| {
                    let p = wtf.eval_point(s);
                    p.g / (p.one_minus_g * (2.0 - p.one_minus_g))
                })
                .collect();
        let gk: Vec<Complex64> = sp.s.iter().map(|&s| wtf.eval(s)).collect();
        let len = sp.len();
        let (yn, yi) = (&spectra[neighbour], &spectra[i]);
        let mut d = vec![Complex64::new(0.0, 0.0); len];
        for k in 0..len {
            let g = if k <= len / 2 {
                gk[k]
            } else {
                gk[len - k].conj()
            };
            d[k] = yn[k] - g * yi[k];
        }
        sp.filter(&d, &kern_n)
    };

    let agents: Vec<AgentWaves> = (1..=n_ag)
        .into_par_iter()
        .map(|i| {
            let a_spec = chain.agent(i);
            let x = &sim.x[i - 1];
            let diff = |u: &[f64]| -> Vec<f64> { x.iter().zip(u).map(|(p, q)| p - q).collect() };
            let g_front = WaveTf::new(a_spec.mf().clone());
            let g_rear = chain.rear_loop(i).map(|m| WaveTf::new(m.clone()));
            let is_hard = chain
                .boundaries()
                .iter()
                .any(|b| b.kind == crate::boundary::BoundaryKind::Hard && b.index == i);
            if is_hard {
                let a_l = side(i, &g_front, i - 1);
                let b_r = side(i, g_rear.as_ref().unwrap(), i + 1);
                let b_l = diff(&a_l);
                let a_r = diff(&b_r);
                return AgentWaves {
                    agent: i,
                    rule: DecompositionRule::Hard,
                    a: a_l.clone(),
                    b: b_l.clone(),
                    residual: 0.0,
                    hard: Some(HardWaves { a_l, b_l, a_r, b_r }),
                };
            }
            let front_inj = injected(i, Channel::Front);
            let rear_inj = injected(i, Channel::Rear);
            let rule = if a_spec.is_homogeneous()
                && left_ok(i)
                && right_ok(i)
                && !front_inj
                && !rear_inj
            {
                DecompositionRule::BothSides
            } else if rear_inj || i == n_ag {
                DecompositionRule::Left
            } else if front_inj {
                DecompositionRule::Right
            } else if left_ok(i) || !right_ok(i) {
                DecompositionRule::Left
            } else {
                DecompositionRule::Right
            };
            let (a, b) = match rule {
                DecompositionRule::BothSides => (
                    side(i, &g_front, i - 1),
                    side(i, g_rear.as_ref().unwrap(), i + 1),
                ),
                DecompositionRule::Left => {
                    let a = side(i, &g_front, i - 1);
                    let b = diff(&a);
                    (a, b)
                }
                _ => {
                    let b = side(i, g_rear.as_ref().unwrap(), i + 1);
                    let a = diff(&b);
                    (a, b)
                }
            };
            let sum: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p + q).collect();
            let residual = rel_l2(x, &sum, trusted_len);
            AgentWaves {
                agent: i,
                rule,
                a,
                b,
                residual,
                hard: None,
            }
        })
        .collect();
    let a0 = sim.x_ref.clone();
    let b0 = sim.x0.iter().zip(&a0).map(|(p, q)| p - q).collect();
    Ok(WaveDecomposition {
        dt: sim.dt,
        trusted_len,
        x0: sim.x0.clone(),
        a0,
        b0,
        agents,
    })
}
