use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::spec::{Absorber, ChainSpec, Channel};
use crate::absorber::{synthesize, AbsorberLaw, Source};
use crate::lti::{FreqGrid, FreqResponse};
use crate::{Error, Result};

/// Sign of `X_eta` in the front error of a hard-boundary agent carrying
/// absorbers. `AsPrinted` uses `X_{eta-1} + X_eta`; kept only to show that
/// it breaks the no-reflection property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HardSign {
    #[default]
    Consistent,
    AsPrinted,
}

/// `X_i(s)/X_ref(s)` for every agent, with absorber kernels evaluated
/// exactly. Solves
/// `(1 + M_f + M_r) X_i - M_f X_{i-1} - M_r X_{i+1} = M_f W_f,i + M_r W_r,i`
/// with `X_0 = X_ref` and `M_r,N = 0`.
pub fn chain_response_at(
    chain: &ChainSpec,
    laws: &[AbsorberLaw],
    s: Complex64,
    sign: HardSign,
) -> Result<Vec<Complex64>> {
    let n = chain.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut a = DMatrix::from_element(n, n, zero);
    let mut b = DVector::from_element(n, zero);
    let mut gains = Vec::with_capacity(n);
    for i in 1..=n {
        let mf = chain.agent(i).mf().eval(s)?;
        let mr = match chain.rear_loop(i) {
            Some(m) => m.eval(s)?,
            None => zero,
        };
        let r = i - 1;
        a[(r, r)] += 1.0 + mf + mr;
        if i == 1 {
            b[r] += mf;
        } else {
            a[(r, r - 1)] -= mf;
        }
        if i < n {
            a[(r, r + 1)] -= mr;
        }
        gains.push((mf, mr));
    }
    if sign == HardSign::AsPrinted {
        for &ab in chain.absorbers() {
            if let Absorber::Hard(e) = ab {
                a[(e - 1, e - 1)] -= 2.0 * gains[e - 1].0;
            }
        }
    }
    for law in laws {
        let r = law.agent - 1;
        let g = match law.channel {
            Channel::Front => gains[r].0,
            Channel::Rear => gains[r].1,
        };
        for t in &law.terms {
            let k = g * t.kernel.eval(s);
            match t.source {
                Source::Agent(j) => a[(r, j - 1)] -= k,
                Source::Reference => b[r] += k,
            }
        }
    }
    let x = a.lu().solve(&b).ok_or(Error::SingularDenominator { s })?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularDenominator { s });
    }
    Ok(x.iter().copied().collect())
}

/// Exact responses of all agents on `grid`; channel `i - 1` is `T_{0,i}`.
pub fn chain_freq_response(
    chain: &ChainSpec,
    grid: &FreqGrid,
    sign: HardSign,
) -> Result<FreqResponse> {
    let laws = synthesize(chain)?;
    let cols: Vec<Vec<Complex64>> = grid
        .omegas()
        .par_iter()
        .map(|&w| chain_response_at(chain, &laws, Complex64::new(0.0, w), sign))
        .collect::<Result<_>>()?;
    let channels = (0..chain.len())
        .map(|i| cols.iter().map(|c| c[i]).collect())
        .collect();
    Ok(FreqResponse {
        omegas: grid.omegas().to_vec(),
        channels,
    })
}

/// `T_{0,i}(j omega) = X_i/X_ref` with the chain's absorbers in place.
pub fn closed_loop_tf(chain: &ChainSpec, i: usize, grid: &FreqGrid) -> Result<FreqResponse> {
    if i == 0 || i > chain.len() {
        return Err(Error::DimensionMismatch(format!(
            "agent {i} outside 1..={}",
            chain.len()
        )));
    }
    let mut fr = chain_freq_response(chain, grid, HardSign::Consistent)?;
    let ch = fr.channels.swap_remove(i - 1);
    fr.channels = vec![ch];
    Ok(fr)
}
