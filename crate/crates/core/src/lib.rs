//! Travelling-wave analysis of heterogeneous multi-agent chains on a path graph.
//!
//! The crate is organised bottom-up:
//!
//! - [`lti`]: polynomials, rational transfer functions, state-space
//!   realisations, zero-order-hold simulation and frequency-domain norms.
//! - [`wave`]: irrational wave transfer functions, their stability test,
//!   numerical inverse Laplace transform and FIR realisation.
//! - [`boundary`]: soft/hard boundary transfer functions and DC gains.
//! - [`chain`]: chain specification, exact simulation and wave decomposition.
//! - [`absorber`]: wave-absorbing control laws, closed-form chain responses
//!   and string-stability checks.
//! - [`scenario`]: configuration files, presets, runs and report emission.

pub mod absorber;
pub mod boundary;
pub mod chain;
mod error;
pub mod lti;
pub mod scenario;
pub mod wave;

pub use error::{Error, Result};
pub use num_complex::Complex64;
