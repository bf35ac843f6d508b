use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("polynomial needs at least one coefficient")]
    EmptyPolynomial,

    #[error("non-finite coefficient {value} at power s^{power}")]
    NonFiniteCoefficient { power: usize, value: f64 },

    #[error("denominator is the zero polynomial")]
    ZeroDenominator,

    #[error("improper transfer function: numerator degree {num} exceeds denominator degree {den}")]
    ImproperTf { num: usize, den: usize },

    #[error("evaluation hit a pole at s = {s} (|den(s)| = {magnitude:e})")]
    PoleHit { s: Complex64, magnitude: f64 },

    #[error("M(s) vanishes at s = {s}")]
    ZeroOfM { s: Complex64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("agent {agent}: {reason}")]
    Agent { agent: usize, reason: String },

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("simulation diverged at t = {t} s")]
    Divergence { t: f64 },

    #[error("integrand does not decay: edge-to-peak ratio {ratio:e} exceeds {tolerance:e}")]
    NonDecayingIntegrand { ratio: f64, tolerance: f64 },

    #[error("FIR truncation too coarse: tail energy {tail_energy:e} exceeds bound {bound:e}")]
    TruncationTooCoarse { tail_energy: f64, bound: f64 },

    #[error("1 - H(s)G(s) vanishes at s = {s}")]
    SingularDenominator { s: Complex64 },

    #[error("{which} open loop has no integrator")]
    NoIntegrator { which: &'static str },

    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
