use core::f64::consts::PI;

use crate::dsp::Filtered;
use crate::encrypt::MessageSpec;
#[allow(unused_imports)]
use crate::prelude::*;
use crate::{Error, Result, TimeTrace};

/// Returned when the residual power vanishes relative to the fitted tone.
pub const SNR_CAP_DB: f64 = 80.0;

/// SNR of a filtered trace against a reference sinusoid, skipping the
/// filter transient.
pub fn snr(filtered: &Filtered, reference: &MessageSpec) -> Result<f64> {
    snr_at(&filtered.trace, filtered.transient, reference.freq_ghz)
}

/// Fits `A sin(2πft) + B cos(2πft)` over `trace[skip..]` by least squares
/// and returns `10 log10(P_S / P_N)` with `P_S = (A² + B²)/2` and `P_N` the
/// mean-square residual.
pub fn snr_at(trace: &TimeTrace, skip: usize, freq_ghz: f64) -> Result<f64> {
    if !(freq_ghz.is_finite() && freq_ghz > 0.0) {
        return Err(Error::InvalidParameter { name: "freq", reason: "must be finite and > 0" });
    }
    let x = trace.samples();
    if skip >= x.len() {
        return Err(Error::InvalidTrace("transient covers the whole trace"));
    }
    let n = x.len() - skip;
    if (n as f64) * trace.dt_ns() * freq_ghz < 10.0 {
        return Err(Error::InvalidTrace("steady span is shorter than ten message periods"));
    }
    let w = 2.0 * PI * freq_ghz;
    let (mut ss, mut cc, mut sc, mut xs, mut xc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (k, &v) in x.iter().enumerate().skip(skip) {
        let (s, c) = (w * trace.time_ns(k)).sin_cos();
        ss += s * s;
        cc += c * c;
        sc += s * c;
        xs += v * s;
        xc += v * c;
    }
    let det = ss * cc - sc * sc;
    let a = (xs * cc - xc * sc) / det;
    let b = (xc * ss - xs * sc) / det;
    let mut resid = 0.0;
    for (k, &v) in x.iter().enumerate().skip(skip) {
        let (s, c) = (w * trace.time_ns(k)).sin_cos();
        let r = v - a * s - b * c;
        resid += r * r;
    }
    let p_noise = resid / n as f64;
    let p_signal = 0.5 * (a * a + b * b);
    if p_signal == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if p_noise <= p_signal * 10.0f64.powf(-SNR_CAP_DB / 10.0) {
        return Ok(SNR_CAP_DB);
    }
    Ok(10.0 * (p_signal / p_noise).log10())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wave(f: f64, amp: f64, phase: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| amp * (2.0 * PI * f * k as f64 * 1e-3 + phase).sin()).collect()
    }

    #[test]
    fn clean_tone_hits_numerical_floor() {
        let tr = TimeTrace::signed(wave(1.0, 0.3, 0.4, 20_000), 1.0, 0.0).unwrap();
        assert!(snr_at(&tr, 0, 1.0).unwrap() >= 60.0);
    }

    #[test]
    fn equal_power_interferer_gives_zero_db() {
        // Tone plus an incommensurate tone of the same power.
        let a = wave(1.0, 1.0, 0.0, 40_000);
        let b = wave(1.37, 1.0, 0.9, 40_000);
        let s: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let tr = TimeTrace::signed(s, 1.0, 0.0).unwrap();
        assert!(snr_at(&tr, 0, 1.0).unwrap().abs() < 0.5);
    }

    #[test]
    fn phase_does_not_matter() {
        let noise: Vec<f64> = (0..30_000).map(|k| ((k * 7919 % 1000) as f64 / 1000.0 - 0.5) * 0.2).collect();
        let mk = |ph: f64| {
            let s: Vec<f64> = wave(2.0, 0.1, ph, 30_000).iter().zip(&noise).map(|(x, y)| x + y).collect();
            snr_at(&TimeTrace::signed(s, 1.0, 0.0).unwrap(), 0, 2.0).unwrap()
        };
        let r0 = mk(0.0);
        for ph in [0.3, 1.2, 2.9] {
            assert!((mk(ph) - r0).abs() < 0.05);
        }
    }

    #[test]
    fn too_short_span_rejected() {
        let tr = TimeTrace::signed(wave(1.0, 1.0, 0.0, 5000), 1.0, 0.0).unwrap();
        assert!(snr_at(&tr, 0, 1.0).is_err());
        assert!(snr_at(&tr, 5000, 1.0).is_err());
    }
}
