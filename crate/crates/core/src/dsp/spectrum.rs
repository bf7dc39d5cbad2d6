use core::f64::consts::PI;

use num_complex::Complex64;

use crate::fft::{next_pow2, Fft};
use crate::prelude::*;
use crate::{Error, Result, TimeTrace};

/// Segments averaged by the Welch estimator (50 % overlap, Hann window).
pub const WELCH_SEGMENTS: usize = 8;

/// Share of non-DC power that defines the carrier bandwidth.
pub const BANDWIDTH_ENERGY_FRACTION: f64 = 0.8;

/// One-sided power spectral density.
///
/// `psd` is power per GHz on `freqs` (GHz, from 0 to Nyquist). The mean of
/// the trace is removed before segment averaging and returned as a line in
/// the DC bin, so `Σ psd · bin_width` equals `mean² + (Welch estimate of the
/// fluctuation power)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    pub freqs: Vec<f64>,
    pub psd: Vec<f64>,
    /// Bin spacing (GHz).
    pub bin_width: f64,
    /// Equivalent noise bandwidth of the analysis window (GHz).
    pub resolution: f64,
}

impl PowerSpectrum {
    /// `Σ psd · bin_width` over all bins.
    pub fn total_power(&self) -> f64 {
        self.psd.iter().sum::<f64>() * self.bin_width
    }

    /// Power outside the DC bin.
    pub fn fluctuation_power(&self) -> f64 {
        self.psd[1..].iter().sum::<f64>() * self.bin_width
    }

    /// `10 log10(psd)`, floored at -300 dB.
    pub fn psd_db(&self) -> Vec<f64> {
        self.psd.iter().map(|&p| if p > 0.0 { (10.0 * p.log10()).max(-300.0) } else { -300.0 }).collect()
    }

    pub fn peak_bin(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.psd.iter().enumerate() {
            if p > self.psd[best] {
                best = i;
            }
        }
        best
    }
}

/// Welch-averaged PSD of `trace` (needs at least 256 samples).
pub fn power_spectrum(trace: &TimeTrace) -> Result<PowerSpectrum> {
    let n = trace.len();
    if n < 256 {
        return Err(Error::InvalidTrace("power spectrum needs at least 256 samples"));
    }
    let fs = trace.sample_rate();
    let mean = trace.mean();
    // Eight half-overlapping segments span 4.5 segment lengths.
    let seg = 2 * n / (WELCH_SEGMENTS + 1);
    let hop = seg / 2;
    let nfft = next_pow2(seg);
    let fft = Fft::new(nfft);
    let window: Vec<f64> = (0..seg).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / seg as f64).cos()).collect();
    let win_power: f64 = window.iter().map(|w| w * w).sum();

    let bins = nfft / 2 + 1;
    let mut acc = vec![0.0; bins];
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    let x = trace.samples();
    for s in 0..WELCH_SEGMENTS {
        let start = s * hop;
        for v in buf.iter_mut() {
            *v = Complex64::new(0.0, 0.0);
        }
        for (i, w) in window.iter().enumerate() {
            buf[i].re = (x[start + i] - mean) * w;
        }
        fft.forward(&mut buf);
        for (a, v) in acc.iter_mut().zip(&buf[..bins]) {
            *a += v.norm_sqr();
        }
    }
    let bin_width = fs / nfft as f64;
    let norm = 1.0 / (WELCH_SEGMENTS as f64 * fs * win_power);
    let psd: Vec<f64> = acc
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            let one_sided = if k == 0 || k == bins - 1 { 1.0 } else { 2.0 };
            a * norm * one_sided
        })
        .collect();
    let mut psd = psd;
    psd[0] += mean * mean / bin_width;
    let freqs = (0..bins).map(|k| k as f64 * bin_width).collect();
    let enbw = seg as f64 * win_power / window.iter().sum::<f64>().powi(2);
    Ok(PowerSpectrum { freqs, psd, bin_width, resolution: enbw * fs / seg as f64 })
}

/// Smallest frequency below which [`BANDWIDTH_ENERGY_FRACTION`] of the
/// non-DC power lies, interpolated linearly inside the crossing bin.
pub fn bandwidth(spec: &PowerSpectrum) -> Result<f64> {
    let total: f64 = spec.psd[1..].iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::UndefinedBandwidth);
    }
    let target = BANDWIDTH_ENERGY_FRACTION * total;
    let mut cum = 0.0;
    for k in 1..spec.psd.len() {
        let next = cum + spec.psd[k];
        if next >= target {
            let frac = if spec.psd[k] > 0.0 { (target - cum) / spec.psd[k] } else { 1.0 };
            return Ok(spec.freqs[k - 1] + frac * (spec.freqs[k] - spec.freqs[k - 1]));
        }
        cum = next;
    }
    Ok(spec.freqs[spec.freqs.len() - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(freq: f64, n: usize, dt_ps: f64) -> TimeTrace {
        let s = (0..n).map(|k| (2.0 * PI * freq * k as f64 * dt_ps * 1e-3).sin()).collect();
        TimeTrace::signed(s, dt_ps, 0.0).unwrap()
    }

    #[test]
    fn tone_has_single_dominant_peak() {
        let tr = tone(2.0, 40_000, 1.0);
        let ps = power_spectrum(&tr).unwrap();
        let peak = ps.peak_bin();
        assert!((ps.freqs[peak] - 2.0).abs() <= ps.bin_width);
        let mut sorted = ps.psd.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = sorted[sorted.len() / 2];
        assert!(10.0 * (ps.psd[peak] / median).log10() >= 30.0);
        let bw = bandwidth(&ps).unwrap();
        assert!((bw - 2.0).abs() <= ps.resolution, "{bw}");
    }

    #[test]
    fn constant_trace_is_pure_dc() {
        let tr = TimeTrace::new(vec![2.5; 1000], 1.0, 0.0).unwrap();
        let ps = power_spectrum(&tr).unwrap();
        assert!(ps.psd[1..].iter().all(|&p| p < 1e-20));
        assert!((ps.total_power() - 6.25).abs() < 1e-9);
        assert_eq!(bandwidth(&ps), Err(Error::UndefinedBandwidth));
    }

    #[test]
    fn energy_matches_mean_square_for_tone() {
        let tr = tone(3.3, 9000, 1.0);
        let ps = power_spectrum(&tr).unwrap();
        let ms: f64 = tr.samples().iter().map(|x| x * x).sum::<f64>() / tr.len() as f64;
        let mean = tr.mean();
        assert!(
            ((ps.fluctuation_power() + ps.psd[0] * ps.bin_width - mean * mean) - (ms - mean * mean)).abs() / ms < 0.01
        );
    }

    #[test]
    fn flat_spectrum_bandwidth_is_eighty_percent() {
        let ps = PowerSpectrum {
            freqs: (0..=1000).map(|k| k as f64 * 0.01).collect(),
            psd: vec![1.0; 1001],
            bin_width: 0.01,
            resolution: 0.01,
        };
        assert!((bandwidth(&ps).unwrap() - 8.0).abs() < 0.02);
    }

    #[test]
    fn short_trace_rejected() {
        let tr = TimeTrace::new(vec![1.0; 255], 1.0, 0.0).unwrap();
        assert!(power_spectrum(&tr).is_err());
    }
}
