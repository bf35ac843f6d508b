//! Chain specification, closed-loop assembly, exact frequency responses,
//! time simulation and travelling-wave decomposition.

pub mod assemble;
pub mod decompose;
pub mod freq;
pub mod metrics;
pub mod sim;
pub mod spec;

pub use assemble::{assemble_chain_ss, ChainSystem};
pub use decompose::{wave_decompose, AgentWaves, DecompositionRule, HardWaves, WaveDecomposition};
pub use freq::{chain_freq_response, chain_response_at, closed_loop_tf, HardSign};
pub use metrics::{local_plateau_estimate, plateau_mean, settling_time, steady_state_value};
pub use sim::{
    realise_laws, realised_response_at, simulate, simulate_with_laws, RealisedLaw, SimOptions,
    SimulationResult,
};
pub use spec::{Absorber, AgentSpec, ChainSpec, Channel, Injection, Reference};
