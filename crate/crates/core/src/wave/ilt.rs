use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::lti::TimeSignal;
use crate::{Error, Result};

/// Parameters of the damped-FFT Bromwich inversion.
#[derive(Debug, Clone, PartialEq)]
pub struct IltOptions {
    /// Minimum FFT length; raised to a power of two covering four times the
    /// output horizon.
    pub n_fft: usize,
    /// Damping abscissa; `2/T_final` when `None`.
    pub c: Option<f64>,
    /// Largest accepted ratio of the integrand magnitude at the highest
    /// sampled frequency to its peak.
    pub edge_tol: f64,
    /// Real point used to extract the `1/s` and `1/s^2` asymptotes.
    pub asymptote_s: f64,
}

impl Default for IltOptions {
    fn default() -> Self {
        Self {
            n_fft: 1 << 16,
            c: None,
            edge_tol: 1e-3,
            asymptote_s: 1e6,
        }
    }
}

/// Fraction of `T_final` over which inverted signals are trusted.
pub const TRUSTED_FRACTION: f64 = 0.8;

/// FFT length actually used for a horizon `t_final` sampled at `dt`.
pub fn fft_len(t_final: f64, dt: f64, min_len: usize) -> usize {
    let need = (4.0 * t_final / dt).ceil() as usize;
    need.max(min_len).next_power_of_two()
}

/// Inverse Laplace transform of a strictly proper `f` sampled at
/// `t0 + n dt` for `n < n_out`, `t_final` sets the damping and period.
///
/// The `1/s` and `1/s^2` asymptotes are removed before the FFT with the
/// decaying pair `j0/(s+l)`, `j1'/(s+l)^2` and added back in closed form,
/// which keeps jumps at `t = 0` out of the truncated series.
pub fn ilt_samples(
    f: &(dyn Fn(Complex64) -> Complex64 + Sync),
    t0: f64,
    dt: f64,
    n_out: usize,
    t_final: f64,
    opts: &IltOptions,
) -> Result<Vec<f64>> {
    if !(dt > 0.0) || !(t_final > 0.0) {
        return Err(Error::DimensionMismatch(format!(
            "bad inversion horizon {t_final} / {dt}"
        )));
    }
    let n = fft_len(t_final, dt, opts.n_fft).max(n_out.next_power_of_two());
    let period = n as f64 * dt;
    let c = opts.c.unwrap_or(2.0 / t_final);
    let lam = 8.0 / t_final;

    // w(S) = S F(S) = j0 + j1/S + ..., Richardson in 1/S
    let big = opts.asymptote_s;
    let w = |s: f64| s * f(Complex64::new(s, 0.0)).re;
    let j0 = 2.0 * w(2.0 * big) - w(big);
    let v = |s: f64| s * (w(s) - j0);
    let j1 = 2.0 * v(2.0 * big) - v(big);
    let k1 = j1 + lam * j0;
    let basis = |s: Complex64| j0 / (s + lam) + k1 / ((s + lam) * (s + lam));

    let half = n / 2;
    let dw = 2.0 * PI / period;
    let rem: Vec<Complex64> = (0..=half)
        .into_par_iter()
        .map(|k| {
            let om = k as f64 * dw;
            let s = Complex64::new(c, om);
            (f(s) - basis(s)) * Complex64::from_polar(1.0, om * t0)
        })
        .collect();
    let peak = rem.iter().fold(0.0_f64, |m, v| m.max(v.norm()));
    if !peak.is_finite() {
        return Err(Error::NonDecayingIntegrand {
            ratio: f64::INFINITY,
            tolerance: opts.edge_tol,
        });
    }
    let edge = rem[half].norm();
    if peak > 0.0 && edge / peak > opts.edge_tol {
        return Err(Error::NonDecayingIntegrand {
            ratio: edge / peak,
            tolerance: opts.edge_tol,
        });
    }

    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    buf[..=half].copy_from_slice(&rem);
    for k in half + 1..n {
        buf[k] = rem[n - k].conj();
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);

    let scale = 1.0 / (n as f64 * dt);
    Ok((0..n_out)
        .map(|i| {
            let t = t0 + i as f64 * dt;
            let r = (c * t).exp() * scale * buf[i].re;
            r + (j0 + k1 * t) * (-lam * t).exp()
        })
        .collect())
}

/// Time response on `[0, t_final]` at step `dt` of a frequency-domain
/// evaluable function.
pub fn ilt_response(
    f: impl Fn(Complex64) -> Complex64 + Sync,
    t_final: f64,
    dt: f64,
    opts: &IltOptions,
) -> Result<TimeSignal> {
    let n_out = (t_final / dt).round() as usize + 1;
    let x = ilt_samples(&f, 0.0, dt, n_out, t_final, opts)?;
    TimeSignal::from_channels(0.0, dt, &[x])
}
