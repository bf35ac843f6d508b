//! Rational transfer functions, state-space realisations and sampled signals.

pub mod poly;
pub mod signal;
pub mod ss;
pub mod tf;

pub use poly::{poly_eval, Polynomial};
pub use signal::{hinf_norm, hinf_norm_sampled, FreqGrid, FreqResponse, TimeSignal};
pub use ss::{ss_simulate, tf_to_statespace, DiscreteSystem, Interconnection, StateSpace};
pub use tf::{count_integrators, tf_eval, RationalTf, TF_EQ_TOL};
