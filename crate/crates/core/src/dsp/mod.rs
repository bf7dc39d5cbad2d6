//! Spectrum estimation, band-pass extraction and SNR scoring.

mod bandpass;
mod snr;
mod spectrum;

pub use bandpass::{apply_bpf, design_bpf, design_bpf_with_order, Biquad, BpfSpec, FilterRealization, Filtered};
pub use snr::{snr, snr_at, SNR_CAP_DB};
pub use spectrum::{bandwidth, power_spectrum, PowerSpectrum, BANDWIDTH_ENERGY_FRACTION, WELCH_SEGMENTS};
