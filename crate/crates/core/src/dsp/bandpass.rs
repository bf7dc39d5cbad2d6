//! Chebyshev type I band-pass design by bilinear transform, realised as a
//! cascade of second-order sections.
//!
//! The analog low-pass prototype (passband edge 1 rad/s) is mapped to a
//! band-pass with `s -> (s² + Ω0²) / (B s)` on prewarped edges, then every
//! pole goes through `z = (2F + s) / (2F - s)`. Each prototype pole yields
//! one conjugate pair of band-pass poles, i.e. one section with numerator
//! `1 - z⁻²` (one zero at DC, one at Nyquist).

use core::f64::consts::PI;

use num_complex::Complex64;

use crate::prelude::*;
use crate::{Error, Result, TimeTrace};

/// Band-pass requirements. Frequencies in GHz, levels in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpfSpec {
    pub center: f64,
    /// Passband width; the passband is `center ± width/2`.
    pub width: f64,
    pub ripple_db: f64,
    pub attenuation_db: f64,
    /// Distance from each passband edge to the stopband edge.
    pub stop_offset: f64,
}

impl BpfSpec {
    /// 0.2 GHz passband, 3 dB ripple, 20 dB stopband starting 0.2 GHz past
    /// each passband edge.
    pub fn centered(center: f64) -> Self {
        Self { center, width: 0.2, ripple_db: 3.0, attenuation_db: 20.0, stop_offset: 0.2 }
    }

    pub fn passband(&self) -> (f64, f64) {
        (self.center - 0.5 * self.width, self.center + 0.5 * self.width)
    }

    pub fn stopband(&self) -> (f64, f64) {
        let (lo, hi) = self.passband();
        (lo - self.stop_offset, hi + self.stop_offset)
    }

    fn validate(&self, sample_rate: f64) -> Result<()> {
        let finite = [self.center, self.width, self.ripple_db, self.attenuation_db, self.stop_offset, sample_rate]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.width <= 0.0 || self.stop_offset <= 0.0 || sample_rate <= 0.0 {
            return Err(Error::FilterDesign("widths, offsets and sample rate must be finite and > 0"));
        }
        if self.ripple_db <= 0.0 || self.attenuation_db <= self.ripple_db {
            return Err(Error::FilterDesign("need 0 < ripple < attenuation"));
        }
        let (_, hi) = self.passband();
        let (slo, shi) = self.stopband();
        if self.center - 0.5 * self.width <= 0.0 {
            return Err(Error::FilterDesign("lower passband edge must be above 0 GHz"));
        }
        if slo <= 0.0 || shi >= 0.5 * sample_rate || hi >= 0.5 * sample_rate {
            return Err(Error::FilterDesign("stopband edges must lie inside (0, Nyquist)"));
        }
        Ok(())
    }
}

/// One section `(b0 + b1 z⁻¹ + b2 z⁻²) / (1 + a1 z⁻¹ + a2 z⁻²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    /// Both poles strictly inside the unit circle.
    pub fn is_stable(&self) -> bool {
        let [a1, a2] = self.a;
        a2.abs() < 1.0 && a1.abs() < 1.0 + a2
    }

    fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        (self.b[0] + z_inv * self.b[1] + z2 * self.b[2]) / (1.0 + z_inv * self.a[0] + z2 * self.a[1])
    }
}

/// Designed cascade plus design metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterRealization {
    pub sections: Vec<Biquad>,
    /// Order of the low-pass prototype; the band-pass has twice this order.
    pub prototype_order: usize,
    pub sample_rate: f64,
    pub spec: BpfSpec,
    /// Group delay at the passband center, in samples.
    pub group_delay: f64,
}

impl FilterRealization {
    /// Complex response at `freq_ghz`.
    pub fn response(&self, freq_ghz: f64) -> Complex64 {
        let w = 2.0 * PI * freq_ghz / self.sample_rate;
        let z_inv = Complex64::new(w.cos(), -w.sin());
        self.sections.iter().map(|s| s.response(z_inv)).product()
    }

    pub fn magnitude_db(&self, freq_ghz: f64) -> f64 {
        20.0 * self.response(freq_ghz).norm().log10()
    }

    pub fn is_stable(&self) -> bool {
        self.sections.iter().all(Biquad::is_stable)
    }

    /// Samples at the start of a filtered trace treated as start-up
    /// transient: five group delays.
    pub fn transient_samples(&self) -> usize {
        (5.0 * self.group_delay).ceil() as usize
    }

    /// Runs the cascade over `x` from rest.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for s in &self.sections {
            let (mut z1, mut z2) = (0.0, 0.0);
            for v in y.iter_mut() {
                let input = *v;
                let out = s.b[0] * input + z1;
                z1 = s.b[1] * input - s.a[0] * out + z2;
                z2 = s.b[2] * input - s.a[1] * out;
                *v = out;
            }
        }
        y
    }
}

fn prewarp(freq_ghz: f64, sample_rate: f64) -> f64 {
    2.0 * sample_rate * (PI * freq_ghz / sample_rate).tan()
}

fn ripple_eps(ripple_db: f64) -> f64 {
    (10.0f64.powf(ripple_db / 10.0) - 1.0).sqrt()
}

/// Lowest prototype order meeting `spec`.
fn minimal_order(spec: &BpfSpec, sample_rate: f64) -> usize {
    let (p1, p2) = spec.passband();
    let (s1, s2) = spec.stopband();
    let (w1, w2) = (prewarp(p1, sample_rate), prewarp(p2, sample_rate));
    let (ws1, ws2) = (prewarp(s1, sample_rate), prewarp(s2, sample_rate));
    let center_sq = w1 * w2;
    let bw = w2 - w1;
    let lp_stop = |ws: f64| (ws * ws - center_sq).abs() / (ws * bw);
    let omega_s = lp_stop(ws1).min(lp_stop(ws2));
    let need = ((10.0f64.powf(spec.attenuation_db / 10.0) - 1.0) / (10.0f64.powf(spec.ripple_db / 10.0) - 1.0)).sqrt();
    let n = need.acosh() / omega_s.acosh();
    // Guard against an exact integer landing a hair above itself.
    ((n - 1e-9).ceil() as usize).max(1)
}

/// Minimal-order Chebyshev type I band-pass for `spec` at `sample_rate`
/// (GS/s).
pub fn design_bpf(spec: &BpfSpec, sample_rate: f64) -> Result<FilterRealization> {
    spec.validate(sample_rate)?;
    let order = minimal_order(spec, sample_rate);
    design_bpf_with_order(spec, sample_rate, order)
}

/// Chebyshev type I band-pass with a fixed prototype order.
pub fn design_bpf_with_order(spec: &BpfSpec, sample_rate: f64, order: usize) -> Result<FilterRealization> {
    spec.validate(sample_rate)?;
    if order == 0 {
        return Err(Error::FilterDesign("order must be >= 1"));
    }
    let (p1, p2) = spec.passband();
    let (w1, w2) = (prewarp(p1, sample_rate), prewarp(p2, sample_rate));
    let center_sq = w1 * w2;
    let bw = w2 - w1;
    let eps = ripple_eps(spec.ripple_db);
    let mu = (1.0 / eps).asinh() / order as f64;
    let two_f = 2.0 * sample_rate;

    let mut sections = Vec::with_capacity(order);
    for k in 1..=order {
        let theta = PI * (2 * k - 1) as f64 / (2 * order) as f64;
        let lp = Complex64::new(-mu.sinh() * theta.sin(), mu.cosh() * theta.cos());
        // s² - p B s + Ω0² = 0
        let pb = lp * bw;
        let disc = (pb * pb - 4.0 * center_sq).sqrt();
        for s in [(pb + disc) * 0.5, (pb - disc) * 0.5] {
            // Keep the upper-half-plane member of each conjugate pair.
            if s.im <= 0.0 {
                continue;
            }
            let z = (two_f + s) / (two_f - s);
            sections.push(Biquad { b: [1.0, 0.0, -1.0], a: [-2.0 * z.re, z.norm_sqr()] });
        }
    }
    if sections.len() != order {
        return Err(Error::FilterDesign("band too wide for a conjugate-pair realisation"));
    }

    // Normalise at the digital image of the analog center frequency.
    let f0 = sample_rate / PI * (center_sq.sqrt() / two_f).atan();
    let mut filt = FilterRealization { sections, prototype_order: order, sample_rate, spec: *spec, group_delay: 0.0 };
    let target = if order.is_multiple_of(2) { 1.0 / (1.0 + eps * eps).sqrt() } else { 1.0 };
    let gain = target / filt.response(f0).norm();
    let per_section = gain.powf(1.0 / order as f64);
    for s in filt.sections.iter_mut() {
        for b in s.b.iter_mut() {
            *b *= per_section;
        }
    }
    if !filt.is_stable() {
        return Err(Error::FilterDesign("designed section is unstable"));
    }
    filt.group_delay = group_delay(&filt, spec.center);
    Ok(filt)
}

/// `-dφ/dω` at `freq_ghz`, in samples.
fn group_delay(filt: &FilterRealization, freq_ghz: f64) -> f64 {
    let dw = 1e-4 * 2.0 * PI * filt.spec.width / filt.sample_rate;
    let df = dw * filt.sample_rate / (2.0 * PI);
    let ratio = filt.response(freq_ghz + df) / filt.response(freq_ghz - df);
    -ratio.arg() / (2.0 * dw)
}

/// Band-pass output plus the number of leading samples that are filter
/// start-up transient.
#[derive(Debug, Clone, PartialEq)]
pub struct Filtered {
    pub trace: TimeTrace,
    pub transient: usize,
}

/// Causal filtering of `trace`. The trace must be sampled at the design
/// rate.
pub fn apply_bpf(filter: &FilterRealization, trace: &TimeTrace) -> Result<Filtered> {
    let rate = trace.sample_rate();
    if (rate - filter.sample_rate).abs() > 1e-9 * filter.sample_rate {
        return Err(Error::SampleRateMismatch { designed: filter.sample_rate, actual: rate });
    }
    let out = filter.filter(trace.samples());
    Ok(Filtered { trace: trace.with_samples(out)?, transient: filter.transient_samples().min(trace.len()) })
}
