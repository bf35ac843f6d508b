//! Wave transfer functions, their stability test, numerical Laplace
//! inversion and FIR realisation of irrational blocks.

pub mod block;
pub mod fir;
pub mod ilt;
pub mod stability;
pub mod wtf;

pub use block::IrrationalBlock;
pub use fir::{apply_fir, wave_fir, FirKernel, FirOptions};
pub use ilt::{fft_len, ilt_response, ilt_samples, IltOptions, TRUSTED_FRACTION};
pub use stability::{check_wtf_stability, StabilityReport};
pub use wtf::{alpha_of, wtf_dc_gain, wtf_eval, WavePoint, WaveTf};
