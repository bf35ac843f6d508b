use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Uniformly sampled multi-channel signal. `samples[k]` is the vector at
/// `t0 + k*dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSignal {
    pub t0: f64,
    pub dt: f64,
    pub samples: Vec<Vec<f64>>,
}

impl TimeSignal {
    pub fn new(t0: f64, dt: f64, samples: Vec<Vec<f64>>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::DimensionMismatch(format!(
                "sample period must be positive, got {dt}"
            )));
        }
        if let Some(first) = samples.first() {
            let dim = first.len();
            if let Some(k) = samples.iter().position(|v| v.len() != dim) {
                return Err(Error::DimensionMismatch(format!(
                    "sample {k} has dimension {}, expected {dim}",
                    samples[k].len()
                )));
            }
        }
        Ok(Self { t0, dt, samples })
    }

    /// Builds from per-channel sequences of equal length.
    pub fn from_channels(t0: f64, dt: f64, channels: &[Vec<f64>]) -> Result<Self> {
        let n = channels.first().map_or(0, Vec::len);
        if channels.iter().any(|c| c.len() != n) {
            return Err(Error::DimensionMismatch("channels differ in length".into()));
        }
        let samples = (0..n)
            .map(|k| channels.iter().map(|c| c[k]).collect())
            .collect();
        Self::new(t0, dt, samples)
    }

    /// Single-channel signal of `n` samples generated from `f(t)`.
    pub fn from_fn(dt: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(0.0, dt, (0..n).map(|k| vec![f(k as f64 * dt)]).collect())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    pub fn channel(&self, i: usize) -> Vec<f64> {
        self.samples.iter().map(|v| v[i]).collect()
    }

    pub fn channels(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|i| self.channel(i)).collect()
    }

    /// Index of the last sample with `t <= t_end`.
    pub fn index_at(&self, t: f64) -> usize {
        (((t - self.t0) / self.dt).floor().max(0.0) as usize).min(self.len().saturating_sub(1))
    }
}

/// Strictly ascending positive angular frequencies (rad/s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreqGrid {
    omegas: Vec<f64>,
}

impl FreqGrid {
    pub fn new(omegas: Vec<f64>) -> Result<Self> {
        if omegas.is_empty() {
            return Err(Error::DimensionMismatch("empty frequency grid".into()));
        }
        if omegas.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::DimensionMismatch(
                "frequencies must be positive and finite".into(),
            ));
        }
        if omegas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::DimensionMismatch(
                "frequencies must be strictly ascending".into(),
            ));
        }
        Ok(Self { omegas })
    }

    /// `n` log-spaced points from `lo` to `hi` inclusive.
    pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 || !(lo > 0.0) || !(hi > lo) {
            return Err(Error::DimensionMismatch(format!(
                "bad log grid [{lo}, {hi}] x {n}"
            )));
        }
        let (a, b) = (lo.ln(), hi.ln());
        Self::new(
            (0..n)
                .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
                .collect(),
        )
    }

    /// 1024 log-spaced points over [1e-3, 1e3] rad/s.
    pub fn default_grid() -> Self {
        Self::log_spaced(1e-3, 1e3, 1024).unwrap()
    }

    /// Same span with twice the density (`2n - 1` points, old points kept).
    pub fn doubled(&self) -> Self {
        let mut omegas = Vec::with_capacity(2 * self.omegas.len());
        for w in self.omegas.windows(2) {
            omegas.push(w[0]);
            omegas.push((w[0] * w[1]).sqrt());
        }
        omegas.push(*self.omegas.last().unwrap());
        Self { omegas }
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.omegas[0]
    }

    pub fn max(&self) -> f64 {
        *self.omegas.last().unwrap()
    }
}

/// Complex responses on a frequency grid, one vector per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqResponse {
    pub omegas: Vec<f64>,
    pub channels: Vec<Vec<Complex64>>,
}

impl FreqResponse {
    /// Evaluates a scalar response on a grid.
    pub fn from_fn(grid: &FreqGrid, f: impl Fn(f64) -> Complex64) -> Self {
        Self {
            omegas: grid.omegas().to_vec(),
            channels: vec![grid.omegas().iter().map(|&w| f(w)).collect()],
        }
    }

    pub fn channel(&self, i: usize) -> &[Complex64] {
        &self.channels[i]
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    /// Largest magnitude of a channel on the grid.
    pub fn peak(&self, i: usize) -> f64 {
        self.channels[i].iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

/// Dense-grid H-infinity norm of a stable scalar system with golden-section
/// refinement around the grid maximiser. The result lies within 1e-4
/// relative of the true supremum for responses resolved by the grid.
pub fn hinf_norm(response: impl Fn(f64) -> Complex64, grid: &FreqGrid) -> f64 {
    let w = grid.omegas();
    let mags: Vec<f64> = w.iter().map(|&x| response(x).norm()).collect();
    let (imax, &peak) =
        mags.iter()
            .enumerate()
            .fold((0, &f64::NEG_INFINITY), |(bi, bm), (i, m)| {
                if m > bm {
                    (i, m)
                } else {
                    (bi, bm)
                }
            });
    if !peak.is_finite() {
        return peak;
    }
    if imax == 0 || imax + 1 == w.len() {
        return peak;
    }
    // golden-section search in log-frequency on the bracketing interval
    let mag = |lw: f64| response(lw.exp()).norm();
    let (mut a, mut b) = (w[imax - 1].ln(), w[imax + 1].ln());
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (mag(c), mag(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = mag(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = mag(d);
        }
        if (b - a).abs() < 1e-12 {
            break;
        }
    }
    peak.max(fc).max(fd)
}

/// H-infinity norm over a sampled response (grid maximum only).
pub fn hinf_norm_sampled(fr: &FreqResponse, channel: usize) -> f64 {
    fr.peak(channel)
}
