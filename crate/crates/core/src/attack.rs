//! Eavesdropper pipeline: scalogram, MSR, PSL decision against a carrier
//! calibrated threshold, then band-pass extraction at the MSR peak.
//!
//! Only the channel trace is used for detection and extraction. The
//! injected message is accepted by [`extract`] solely to score the result.

use crate::dsp::{apply_bpf, design_bpf, snr, snr_at, BpfSpec, Filtered};
use crate::encrypt::MessageSpec;
use crate::tfa::{msr_from_means, scalogram_row_means, FrequencyGrid, MsrCurve, WaveletParams};
use crate::{Error, Result, TimeTrace};

/// Band-pass settings applied around whatever center the attack picks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpfTemplate {
    pub width: f64,
    pub ripple_db: f64,
    pub attenuation_db: f64,
    pub stop_offset: f64,
}

impl Default for BpfTemplate {
    fn default() -> Self {
        let s = BpfSpec::centered(1.0);
        Self { width: s.width, ripple_db: s.ripple_db, attenuation_db: s.attenuation_db, stop_offset: s.stop_offset }
    }
}

impl BpfTemplate {
    pub fn at(&self, center: f64) -> BpfSpec {
        BpfSpec {
            center,
            width: self.width,
            ripple_db: self.ripple_db,
            attenuation_db: self.attenuation_db,
            stop_offset: self.stop_offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackConfig {
    pub wavelet: WaveletParams,
    pub grid: FrequencyGrid,
    /// Added to the carrier PSL to form the detection threshold (dB).
    pub margin_db: f64,
    pub bpf: BpfTemplate,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            wavelet: WaveletParams::default(),
            grid: FrequencyGrid::default(),
            margin_db: Self::DEFAULT_MARGIN_DB,
            bpf: BpfTemplate::default(),
        }
    }
}

impl AttackConfig {
    pub const DEFAULT_MARGIN_DB: f64 = 0.01;

    pub fn validate(&self) -> Result<()> {
        self.wavelet.validate()?;
        if !(self.margin_db.is_finite() && self.margin_db >= 0.0) {
            return Err(Error::InvalidParameter { name: "margin_db", reason: "must be finite and >= 0" });
        }
        Ok(())
    }
}

/// MSR curve of a trace under `cfg`.
pub fn msr_curve(trace: &TimeTrace, cfg: &AttackConfig) -> Result<MsrCurve> {
    cfg.validate()?;
    let means = scalogram_row_means(trace, &cfg.grid, &cfg.wavelet)?;
    msr_from_means(cfg.grid.freqs(), &means)
}

/// Detection threshold from a message-free carrier: its PSL plus the
/// configured margin.
pub fn calibrate_threshold(carrier: &TimeTrace, cfg: &AttackConfig) -> Result<f64> {
    Ok(msr_curve(carrier, cfg)?.psl + cfg.margin_db)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    pub detected: bool,
    /// MSR peak frequency, present only when detected.
    pub est_freq: Option<f64>,
    pub psl: f64,
    pub threshold: f64,
    /// Detected, but the peak sits on an interior bin next to the excluded
    /// grid edges.
    pub low_confidence: bool,
    pub msr: MsrCurve,
}

pub fn detect(trace: &TimeTrace, cfg: &AttackConfig, threshold: f64) -> Result<DetectionReport> {
    if trace.len() < 16 {
        return Err(Error::InvalidTrace("at least 16 samples are required"));
    }
    let msr = msr_curve(trace, cfg)?;
    let detected = msr.psl > threshold;
    Ok(DetectionReport {
        detected,
        est_freq: detected.then_some(msr.peak_freq),
        psl: msr.psl,
        threshold,
        low_confidence: detected && msr.peak_at_edge(),
        msr,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionResult {
    pub filtered: Filtered,
    pub center_used: f64,
    /// SNR against a sinusoid at the detected frequency.
    pub snr_detected: f64,
    /// SNR against the injected message, when it was supplied.
    pub snr_true: Option<f64>,
}

/// Band-pass extraction at the detected frequency.
pub fn extract(
    trace: &TimeTrace,
    report: &DetectionReport,
    cfg: &AttackConfig,
    truth: Option<&MessageSpec>,
) -> Result<ExtractionResult> {
    match (report.detected, report.est_freq) {
        (true, Some(center)) => extract_at(trace, center, cfg, truth),
        _ => Err(Error::NotDetected),
    }
}

/// Band-pass extraction at an explicit center frequency.
pub fn extract_at(
    trace: &TimeTrace,
    center: f64,
    cfg: &AttackConfig,
    truth: Option<&MessageSpec>,
) -> Result<ExtractionResult> {
    let filter = design_bpf(&cfg.bpf.at(center), trace.sample_rate())?;
    let filtered = apply_bpf(&filter, trace)?;
    let snr_detected = snr_at(&filtered.trace, filtered.transient, center)?;
    let snr_true = truth.map(|m| snr(&filtered, m)).transpose()?;
    Ok(ExtractionResult { filtered, center_used: center, snr_detected, snr_true })
}
