//! Complex-Morlet continuous wavelet transform, scalogram, mean scalogram
//! ratio (MSR) and peak sidelobe level (PSL).
//!
//! Times inside the transform are measured in samples. The scale for an
//! analysis frequency `f` (GHz) is `a = fc / (f · dt)` with `dt` in ns, so a
//! wavelet of center frequency `fc` oscillates at `f` when stretched by `a`.
//!
//! ```text
//! ψ(u)   = (π fb)^(-1/2) · exp(2πi fc u) · exp(-u² / fb)
//! W(a,k) = a^(-1/2) · Σ_n x[n] · ψ*((n - k) / a)
//! SC     = |W|
//! ```
//!
//! The trace is taken as zero outside its support. The fast path evaluates
//! every row as one FFT convolution with the sampled kernel, truncated where
//! the Gaussian envelope falls below `e^-50`.

use core::f64::consts::PI;

use num_complex::Complex64;

use crate::fft::{next_pow2, Fft};
use crate::prelude::*;
use crate::{Error, Result, TimeTrace};

/// Envelope cut-off in units of `sqrt(fb)`: `exp(-u²/fb) < e^-50` beyond it.
const KERNEL_CUTOFF_SQ: f64 = 50.0;

/// Number of envelope e-folding widths trimmed from each end before
/// averaging a scalogram row.
pub const EDGE_EFOLDINGS: f64 = 3.0;

/// Complex Morlet parameters: bandwidth `fb` and center frequency `fc`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveletParams {
    pub fb: f64,
    pub fc: f64,
}

impl Default for WaveletParams {
    /// A short envelope (`fb·fc² = 0.5`). Longer envelopes resolve the
    /// external-cavity harmonics of the carrier, which then dominate the MSR.
    fn default() -> Self {
        Self { fb: 0.5, fc: 1.0 }
    }
}

impl WaveletParams {
    pub fn new(fb: f64, fc: f64) -> Result<Self> {
        let w = Self { fb, fc };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fb.is_finite() && self.fb > 0.0) {
            return Err(Error::InvalidParameter { name: "fb", reason: "must be finite and > 0" });
        }
        if !(self.fc.is_finite() && self.fc > 0.0) {
            return Err(Error::InvalidParameter { name: "fc", reason: "must be finite and > 0" });
        }
        Ok(())
    }

    /// Scale in samples for analysis frequency `freq_ghz` at interval `dt_ns`.
    pub fn scale(&self, freq_ghz: f64, dt_ns: f64) -> f64 {
        self.fc / (freq_ghz * dt_ns)
    }

    /// Conjugated, scale-normalised kernel value `a^(-1/2) ψ*(m / a)`.
    #[inline]
    pub fn kernel(&self, m: f64, scale: f64) -> Complex64 {
        let u = m / scale;
        let env = (-u * u / self.fb).exp() / (PI * self.fb).sqrt() / scale.sqrt();
        let (s, c) = (2.0 * PI * self.fc * u).sin_cos();
        Complex64::new(env * c, -env * s)
    }

    /// Envelope e-folding half-width in samples at `scale`.
    pub fn efolding(&self, scale: f64) -> f64 {
        scale * self.fb.sqrt()
    }
}

/// Uniformly spaced analysis frequencies (GHz), strictly increasing, at
/// least five bins.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    freqs: Vec<f64>,
    /// The nominal step, kept so a grid can be described without the
    /// rounding of neighbouring bins.
    step: f64,
}

impl Default for FrequencyGrid {
    /// 0.25 to 6.0 GHz in 0.05 GHz steps (116 bins).
    fn default() -> Self {
        Self::uniform(0.25, 0.05, 116).expect("default grid is valid")
    }
}

impl FrequencyGrid {
    pub fn uniform(start_ghz: f64, step_ghz: f64, count: usize) -> Result<Self> {
        if !(start_ghz.is_finite() && start_ghz > 0.0) {
            return Err(Error::InvalidGrid("start frequency must be > 0"));
        }
        if !(step_ghz.is_finite() && step_ghz > 0.0) {
            return Err(Error::InvalidGrid("spacing must be > 0"));
        }
        let mut grid = Self::new((0..count).map(|i| start_ghz + i as f64 * step_ghz).collect())?;
        grid.step = step_ghz;
        Ok(grid)
    }

    /// Grid from `start` to `stop` inclusive (within half a step).
    pub fn span(start_ghz: f64, stop_ghz: f64, step_ghz: f64) -> Result<Self> {
        if !(step_ghz > 0.0 && stop_ghz >= start_ghz) {
            return Err(Error::InvalidGrid("stop must be >= start and spacing > 0"));
        }
        let count = ((stop_ghz - start_ghz) / step_ghz + 0.5).floor() as usize + 1;
        Self::uniform(start_ghz, step_ghz, count)
    }

    pub fn new(freqs: Vec<f64>) -> Result<Self> {
        if freqs.len() < 5 {
            return Err(Error::InvalidGrid("needs at least five bins"));
        }
        if freqs.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::InvalidGrid("frequencies must be finite and > 0"));
        }
        let step = freqs[1] - freqs[0];
        if step <= 0.0 {
            return Err(Error::InvalidGrid("frequencies must increase"));
        }
        for w in freqs.windows(2) {
            let d = w[1] - w[0];
            if d <= 0.0 || (d - step).abs() > 1e-6 * step {
                return Err(Error::InvalidGrid("spacing must be uniform"));
            }
        }
        Ok(Self { freqs, step })
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.step
    }

    pub fn max(&self) -> f64 {
        self.freqs[self.freqs.len() - 1]
    }
}

/// CWT magnitudes: one row per grid frequency, one column per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Scalogram {
    values: Vec<f64>,
    cols: usize,
    grid: FrequencyGrid,
    dt_ps: f64,
    /// Columns trimmed from each end of a row before averaging.
    edge: Vec<usize>,
}

impl Scalogram {
    pub fn rows(&self) -> usize {
        self.grid.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn dt_ps(&self) -> f64 {
        self.dt_ps
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    /// Columns excluded from each end of row `i` in [`Scalogram::row_means`].
    pub fn edge_columns(&self, i: usize) -> usize {
        self.edge[i]
    }

    /// Mean of each row over its interior columns.
    pub fn row_means(&self) -> Vec<f64> {
        (0..self.rows()).map(|i| interior_mean(self.row(i), self.edge[i])).collect()
    }

    /// Builds a scalogram from explicit rows (e.g. synthetic test data). No
    /// columns are trimmed.
    pub fn from_rows(rows: Vec<Vec<f64>>, grid: FrequencyGrid, dt_ps: f64) -> Result<Self> {
        if rows.len() != grid.len() {
            return Err(Error::InvalidGrid("row count must equal grid length"));
        }
        let cols = rows[0].len();
        if cols == 0 || rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidTrace("rows must be equally long and non-empty"));
        }
        if rows.iter().flatten().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidTrace("scalogram entries must be finite and >= 0"));
        }
        let edge = vec![0; rows.len()];
        Ok(Self { values: rows.concat(), cols, grid, dt_ps, edge })
    }
}

fn interior_mean(row: &[f64], edge: usize) -> f64 {
    let inner = &row[edge..row.len() - edge];
    inner.iter().sum::<f64>() / inner.len() as f64
}

fn check_inputs(trace: &TimeTrace, grid: &FrequencyGrid, w: &WaveletParams) -> Result<()> {
    w.validate()?;
    if trace.len() < 16 {
        return Err(Error::InvalidTrace("at least 16 samples are required"));
    }
    let nyquist = trace.nyquist_ghz();
    if let Some(&f) = grid.freqs().iter().find(|&&f| f >= nyquist) {
        return Err(Error::AboveNyquist { freq_ghz: f, nyquist_ghz: nyquist });
    }
    Ok(())
}

/// Trim for one row, leaving at least one column.
fn edge_for(w: &WaveletParams, scale: f64, cols: usize) -> usize {
    let e = (EDGE_EFOLDINGS * w.efolding(scale)).ceil() as usize;
    e.min((cols - 1) / 2)
}

/// Shared FFT state for computing rows of one trace.
struct RowEngine<'a> {
    w: &'a WaveletParams,
    n: usize,
    dt_ns: f64,
    fft: Fft,
    spectrum: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl<'a> RowEngine<'a> {
    fn new(trace: &TimeTrace, grid: &FrequencyGrid, w: &'a WaveletParams) -> Self {
        let n = trace.len();
        let dt_ns = trace.dt_ns();
        // The lowest frequency has the widest kernel.
        let k_max = kernel_half_width(w, w.scale(grid.freqs()[0], dt_ns), n);
        let fft = Fft::new(next_pow2(n + k_max + 1));
        let mut spectrum = vec![Complex64::new(0.0, 0.0); fft.len()];
        for (dst, &x) in spectrum.iter_mut().zip(trace.samples()) {
            dst.re = x;
        }
        fft.forward(&mut spectrum);
        let scratch = vec![Complex64::new(0.0, 0.0); fft.len()];
        Self { w, n, dt_ns, fft, spectrum, scratch }
    }

    /// Writes `|W|` for one frequency into `out` (length `n`).
    fn row(&mut self, freq_ghz: f64, out: &mut [f64]) {
        let scale = self.w.scale(freq_ghz, self.dt_ns);
        let k = kernel_half_width(self.w, scale, self.n);
        let m = self.fft.len();
        for v in self.scratch.iter_mut() {
            *v = Complex64::new(0.0, 0.0);
        }
        // Correlation W[k] = Σ x[n] h[n-k] is a convolution with g[j] = h[-j].
        for j in 0..=k {
            let jf = j as f64;
            self.scratch[j] = self.w.kernel(-jf, scale);
            if j > 0 {
                self.scratch[m - j] = self.w.kernel(jf, scale);
            }
        }
        self.fft.forward(&mut self.scratch);
        for (s, x) in self.scratch.iter_mut().zip(&self.spectrum) {
            *s *= x;
        }
        self.fft.inverse(&mut self.scratch);
        for (o, v) in out.iter_mut().zip(&self.scratch[..self.n]) {
            *o = v.norm();
        }
    }
}

fn kernel_half_width(w: &WaveletParams, scale: f64, n: usize) -> usize {
    let k = (scale * (KERNEL_CUTOFF_SQ * w.fb).sqrt()).ceil() as usize;
    k.min(n - 1)
}

/// Scalogram of `trace` on `grid`.
pub fn cwt(trace: &TimeTrace, grid: &FrequencyGrid, w: &WaveletParams) -> Result<Scalogram> {
    check_inputs(trace, grid, w)?;
    let n = trace.len();
    let mut engine = RowEngine::new(trace, grid, w);
    let mut values = vec![0.0; grid.len() * n];
    let mut edge = Vec::with_capacity(grid.len());
    for (i, &f) in grid.freqs().iter().enumerate() {
        engine.row(f, &mut values[i * n..(i + 1) * n]);
        edge.push(edge_for(w, w.scale(f, trace.dt_ns()), n));
    }
    Ok(Scalogram { values, cols: n, grid: grid.clone(), dt_ps: trace.dt_ps(), edge })
}

/// Edge-trimmed row means of the scalogram without keeping the matrix.
/// Equal to `cwt(..)?.row_means()`.
pub fn scalogram_row_means(trace: &TimeTrace, grid: &FrequencyGrid, w: &WaveletParams) -> Result<Vec<f64>> {
    check_inputs(trace, grid, w)?;
    let n = trace.len();
    let mut engine = RowEngine::new(trace, grid, w);
    let mut row = vec![0.0; n];
    Ok(grid
        .freqs()
        .iter()
        .map(|&f| {
            engine.row(f, &mut row);
            interior_mean(&row, edge_for(w, w.scale(f, trace.dt_ns()), n))
        })
        .collect())
}

/// MSR per interior bin with its peak and PSL.
#[derive(Debug, Clone, PartialEq)]
pub struct MsrCurve {
    /// Interior grid frequencies (first and last two bins dropped).
    pub freqs: Vec<f64>,
    pub eta: Vec<f64>,
    pub peak_index: usize,
    pub peak_freq: f64,
    /// Peak sidelobe level in dB; `+inf` when there is no sidelobe.
    pub psl: f64,
}

impl MsrCurve {
    /// Builds the curve from per-bin values and evaluates its peak and PSL.
    pub fn from_values(freqs: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        if eta.is_empty() || eta.len() != freqs.len() {
            return Err(Error::InvalidGrid("curve needs one value per frequency"));
        }
        let peak_index = argmax(&eta);
        let peak_freq = freqs[peak_index];
        let psl = psl(&eta);
        Ok(Self { freqs, eta, peak_index, peak_freq, psl })
    }

    /// True when the peak sits on the first or last interior bin, next to
    /// the excluded grid edges.
    pub fn peak_at_edge(&self) -> bool {
        self.peak_index == 0 || self.peak_index + 1 == self.eta.len()
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Bins closer than this to the peak are part of the main lobe.
pub const SIDELOBE_EXCLUSION: usize = 2;

/// `10 log10(η_peak / η_sidelobe)` where the sidelobe is the largest value
/// more than [`SIDELOBE_EXCLUSION`] bins away from the peak. Returns `+inf`
/// if no such bin exists or it is zero.
pub fn psl(eta: &[f64]) -> f64 {
    let p = argmax(eta);
    let peak = eta[p];
    let side = eta
        .iter()
        .enumerate()
        .filter(|(j, _)| j.abs_diff(p) > SIDELOBE_EXCLUSION)
        .map(|(_, &v)| v)
        .fold(0.0f64, f64::max);
    if side <= 0.0 {
        return f64::INFINITY;
    }
    10.0 * (peak / side).log10()
}

/// MSR from per-row means: `η_i = m_i / Σ_{j=i-2}^{i+2} m_j` for interior
/// bins.
pub fn msr_from_means(freqs: &[f64], means: &[f64]) -> Result<MsrCurve> {
    if means.len() < 5 || freqs.len() != means.len() {
        return Err(Error::InvalidGrid("MSR needs at least five rows"));
    }
    if means.iter().all(|&m| m == 0.0) {
        return Err(Error::UndefinedRatio);
    }
    let eta = (2..means.len() - 2)
        .map(|i| {
            let window: f64 = means[i - 2..=i + 2].iter().sum();
            if window > 0.0 {
                means[i] / window
            } else {
                0.0
            }
        })
        .collect();
    MsrCurve::from_values(freqs[2..freqs.len() - 2].to_vec(), eta)
}

/// MSR curve of a scalogram.
pub fn msr(sc: &Scalogram) -> Result<MsrCurve> {
    msr_from_means(sc.grid().freqs(), &sc.row_means())
}
