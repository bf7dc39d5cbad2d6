//! Chaotic optical emitter simulation and a time-frequency eavesdropping
//! attack against sinusoidal messages hidden in the chaotic carrier.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the command line
//! and the sweep harness live in the `chaostap-cli` companion crate.
//!
//! Pipeline overview:
//!
//! - [`laser`] integrates the Lang-Kobayashi delayed-feedback rate equations
//!   and produces an optical power [`TimeTrace`].
//! - [`encrypt`] hides a sinusoid by chaos masking (multiplying the emitted
//!   power) or chaos modulation (modulating the bias current).
//! - [`tfa`] computes a complex-Morlet scalogram, the mean scalogram ratio
//!   curve and its peak sidelobe level.
//! - [`dsp`] holds the Welch spectrum, carrier bandwidth, the Chebyshev
//!   type I band-pass and the sinusoid SNR estimator.
//! - [`attack`] chains the above into threshold calibration, detection and
//!   extraction.
#![no_std]

extern crate alloc;

pub mod attack;
pub mod dsp;
pub mod encrypt;
mod error;
pub mod fft;
pub mod laser;
pub mod tfa;
mod trace;

pub use error::{Error, Result};
pub use trace::TimeTrace;

/// `alloc` collections and the `libm`-backed float methods.
mod prelude {
    pub(crate) use alloc::vec;
    pub(crate) use alloc::vec::Vec;
    // Unused whenever std is linked in, since inherent methods win.
    #[allow(unused_imports)]
    pub(crate) use num_traits::Float;
}
