use num_complex::Complex64;
use serde::Serialize;

use super::block::IrrationalBlock;
use super::ilt::{ilt_samples, IltOptions};
use crate::lti::TimeSignal;
use crate::{Error, Result};

/// Finite impulse response realisation: `y[n] = sum_j taps[j] u[n-j]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirKernel {
    pub dt: f64,
    pub taps: Vec<f64>,
    /// Energy of the last tenth of the untrimmed kernel relative to the total.
    pub tail_energy: f64,
}

/// Options for [`wave_fir`].
#[derive(Debug, Clone, PartialEq)]
pub struct FirOptions {
    /// Taps sample the impulse response at `(j + offset) dt`. An offset of
    /// one half compensates the half-sample lag of a zero-order hold.
    pub offset: f64,
    /// Required tap sum; `None` keeps the raw sum.
    pub dc_target: Option<f64>,
    pub tail_bound: f64,
    pub ilt: IltOptions,
}

impl Default for FirOptions {
    fn default() -> Self {
        Self {
            offset: 0.0,
            dc_target: None,
            tail_bound: 1e-4,
            ilt: IltOptions::default(),
        }
    }
}

impl FirKernel {
    pub fn constant(k: f64, dt: f64) -> Self {
        Self {
            dt,
            taps: vec![k],
            tail_energy: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn dc_gain(&self) -> f64 {
        self.taps.iter().sum()
    }

    /// `sum_j taps[j] e^{-s j dt}`.
    pub fn transform(&self, s: Complex64) -> Complex64 {
        let z = (-s * self.dt).exp();
        self.taps
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &t| acc * z + t)
    }

    /// Continuous-time equivalent of the kernel driving a zero-order hold:
    /// the transform times `(1 - e^{-s dt})/(s dt)`.
    pub fn held_response(&self, s: Complex64) -> Complex64 {
        let x = s * self.dt;
        let hold = if x.norm() < 1e-6 {
            1.0 - 0.5 * x
        } else {
            (1.0 - (-x).exp()) / x
        };
        self.transform(s) * hold
    }

    /// Output sample `n` given the input history `u` (oldest first, `u[n]`
    /// is the current sample).
    pub fn output_at(&self, u: &[f64], n: usize) -> f64 {
        let m = self.taps.len().min(n + 1);
        (0..m).map(|j| self.taps[j] * u[n - j]).sum()
    }
}

/// Samples the impulse response of `block` into a kernel covering `horizon`
/// seconds. The tail-energy diagnostic is checked before trailing taps that
/// are negligible are dropped, and the optional DC target is met by
/// distributing the correction in proportion to the tap magnitudes.
pub fn wave_fir(
    block: &IrrationalBlock,
    dt: f64,
    horizon: f64,
    opts: &FirOptions,
) -> Result<FirKernel> {
    let n = ((horizon / dt).round() as usize).max(1);
    let d = block.feedthrough();
    let strict = |s: Complex64| block.eval(s) - d;
    let h = ilt_samples(&strict, opts.offset * dt, dt, n, horizon, &opts.ilt)?;
    let mut taps: Vec<f64> = h.iter().map(|v| v * dt).collect();
    taps[0] += d;
    if taps.iter().any(|t| !t.is_finite()) {
        return Err(Error::TruncationTooCoarse {
            tail_energy: f64::NAN,
            bound: opts.tail_bound,
        });
    }
    let total: f64 = taps.iter().map(|t| t * t).sum();
    let tail: f64 = taps[n - n / 10..].iter().map(|t| t * t).sum();
    let tail_energy = if total > 0.0 { tail / total } else { 0.0 };
    if tail_energy > opts.tail_bound {
        return Err(Error::TruncationTooCoarse {
            tail_energy,
            bound: opts.tail_bound,
        });
    }
    let peak = taps.iter().fold(0.0_f64, |m, t| m.max(t.abs()));
    while taps.len() > 1 && taps.last().unwrap().abs() <= 1e-14 * peak {
        taps.pop();
    }
    if let Some(target) = opts.dc_target {
        let err = target - taps.iter().sum::<f64>();
        let mass: f64 = taps.iter().map(|t| t.abs()).sum();
        if mass > 0.0 {
            for t in &mut taps {
                *t += err * t.abs() / mass;
            }
        } else {
            taps[0] += err;
        }
    }
    Ok(FirKernel {
        dt,
        taps,
        tail_energy,
    })
}

/// Causal discrete convolution of every channel of `u` with the kernel.
pub fn apply_fir(k: &FirKernel, u: &TimeSignal) -> Result<TimeSignal> {
    if (u.dt - k.dt).abs() > 1e-12 * k.dt {
        return Err(Error::DimensionMismatch(format!(
            "kernel step {} differs from signal step {}",
            k.dt, u.dt
        )));
    }
    let channels: Vec<Vec<f64>> = u
        .channels()
        .iter()
        .map(|x| (0..x.len()).map(|n| k.output_at(x, n)).collect())
        .collect();
    TimeSignal::from_channels(u.t0, u.dt, &channels)
}
