//! Trace files, key=value records and the plotting CSVs.

use std::fmt::Display;
use std::fmt::Write as _;

use chaostap::dsp::PowerSpectrum;
use chaostap::tfa::{MsrCurve, Scalogram};
use chaostap::TimeTrace;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TraceFileError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("missing header field `{0}`")]
    MissingHeader(&'static str),
    #[error("header says {expected} samples, file has {found}")]
    Count { expected: usize, found: usize },
    #[error("invalid trace: {0}")]
    Invalid(#[from] chaostap::Error),
}

/// `#`-header lines with `dt_ps`, `t0_ns` and `n`, then one sample per line
/// at 17 significant digits, which round-trips every `f64` exactly.
pub fn format_trace(trace: &TimeTrace) -> String {
    let mut out = String::with_capacity(trace.len() * 25 + 64);
    let _ = writeln!(out, "# dt_ps={:?}", trace.dt_ps());
    let _ = writeln!(out, "# t0_ns={:?}", trace.t0_ns());
    let _ = writeln!(out, "# n={}", trace.len());
    for v in trace.samples() {
        let _ = writeln!(out, "{v:.16e}");
    }
    out
}

/// Parses [`format_trace`] output. Samples may be signed (filtered traces).
pub fn parse_trace(text: &str) -> Result<TimeTrace, TraceFileError> {
    let (mut dt, mut t0, mut n) = (None, None, None);
    let mut samples = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let s = raw.trim();
        if s.is_empty() {
            continue;
        }
        let malformed = |reason: &str| TraceFileError::Malformed { line, reason: reason.to_string() };
        if let Some(h) = s.strip_prefix('#') {
            let Some((k, v)) = h.split_once('=') else { continue };
            let v = v.trim();
            match k.trim() {
                "dt_ps" => dt = Some(v.parse::<f64>().map_err(|_| malformed("dt_ps is not a number"))?),
                "t0_ns" => t0 = Some(v.parse::<f64>().map_err(|_| malformed("t0_ns is not a number"))?),
                "n" => n = Some(v.parse::<usize>().map_err(|_| malformed("n is not a count"))?),
                _ => {}
            }
            continue;
        }
        samples.push(s.parse::<f64>().map_err(|_| malformed("sample is not a number"))?);
    }
    let dt = dt.ok_or(TraceFileError::MissingHeader("dt_ps"))?;
    let t0 = t0.ok_or(TraceFileError::MissingHeader("t0_ns"))?;
    let n = n.ok_or(TraceFileError::MissingHeader("n"))?;
    if n != samples.len() {
        return Err(TraceFileError::Count { expected: n, found: samples.len() });
    }
    Ok(TimeTrace::signed(samples, dt, t0)?)
}

/// One `key=value` record rendered on a single line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(Vec<(String, String)>);

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl Display) -> Self {
        self.0.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn parse(line: &str) -> Option<Self> {
        line.split_whitespace()
            .map(|kv| kv.split_once('=').map(|(k, v)| (k.to_string(), v.to_string())))
            .collect::<Option<Vec<_>>>()
            .map(Self)
    }
}

impl Display for Record {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// `freq_ghz,eta` rows of the MSR curve.
pub fn format_msr(curve: &MsrCurve) -> String {
    let mut out = String::from("freq_ghz,eta\n");
    for (f, e) in curve.freqs.iter().zip(&curve.eta) {
        let _ = writeln!(out, "{f:?},{e:?}");
    }
    out
}

/// Header row of frequencies (GHz), then one row per sample starting with
/// its time (ns).
pub fn format_scalogram(sc: &Scalogram, t0_ns: f64) -> String {
    let mut out = String::from("time_ns");
    for f in sc.grid().freqs() {
        let _ = write!(out, ",{f:?}");
    }
    out.push('\n');
    let dt_ns = sc.dt_ps() * 1e-3;
    for k in 0..sc.cols() {
        let _ = write!(out, "{:?}", t0_ns + k as f64 * dt_ns);
        for i in 0..sc.rows() {
            let _ = write!(out, ",{:?}", sc.get(i, k));
        }
        out.push('\n');
    }
    out
}

/// `freq_ghz,psd_db` rows.
pub fn format_psd(ps: &PowerSpectrum) -> String {
    let mut out = String::from("freq_ghz,psd_db\n");
    for (f, p) in ps.freqs.iter().zip(ps.psd_db()) {
        let _ = writeln!(out, "{f:?},{p:?}");
    }
    out
}
