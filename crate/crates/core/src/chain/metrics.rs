use super::spec::ChainSpec;
use crate::boundary::{soft_dc_gains, BoundaryKind};
use crate::{Error, Result};

/// Mean of the last 5% of a trace.
pub fn steady_state_value(x: &[f64]) -> f64 {
    let m = (x.len() / 20).max(1);
    x[x.len() - m..].iter().sum::<f64>() / m as f64
}

/// Time after which `x` stays within `tol` (relative) of its final value.
/// `None` when the last sample is still outside the band.
pub fn settling_time(t: &[f64], x: &[f64], tol: f64) -> Option<f64> {
    let xf = steady_state_value(x);
    let band = if xf.abs() > 1e-12 {
        tol * xf.abs()
    } else {
        tol
    };
    match x.iter().rposition(|v| (v - xf).abs() > band) {
        None => Some(t[0]),
        Some(k) if k + 1 < t.len() => Some(t[k + 1]),
        Some(_) => None,
    }
}

/// Mean of `x` over `[t0, t1]`.
pub fn plateau_mean(t: &[f64], x: &[f64], t0: f64, t1: f64) -> f64 {
    let (mut s, mut n) = (0.0, 0usize);
    for (tk, v) in t.iter().zip(x) {
        if *tk >= t0 && *tk <= t1 {
            s += v;
            n += 1;
        }
    }
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

/// Predicted plateau of agent `i` between the arrival of the transmitted
/// front and the return of the far-end reflection: the soft-boundary DC
/// transmission gain when a soft boundary sits just left of `i`, else 1.
pub fn local_plateau_estimate(chain: &ChainSpec, i: usize) -> Result<f64> {
    if i == 0 || i > chain.len() {
        return Err(Error::DimensionMismatch(format!(
            "agent {i} outside 1..={}",
            chain.len()
        )));
    }
    let soft_left = chain
        .boundaries()
        .iter()
        .any(|b| b.kind == BoundaryKind::Soft && b.index + 1 == i);
    if !soft_left {
        return Ok(1.0);
    }
    let mr = chain
        .rear_loop(i - 1)
        .expect("soft boundary has a rear loop");
    Ok(soft_dc_gains(mr, chain.agent(i).mf())?.kaa)
}
