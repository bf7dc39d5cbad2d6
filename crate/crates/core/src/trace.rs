use crate::prelude::*;
use crate::{Error, Result};

/// Uniformly sampled optical power.
///
/// `dt_ps` is the sample interval in picoseconds and `t0_ns` the time of the
/// first sample in nanoseconds. Samples are finite and non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTrace {
    samples: Vec<f64>,
    dt_ps: f64,
    t0_ns: f64,
}

impl TimeTrace {
    pub fn new(samples: Vec<f64>, dt_ps: f64, t0_ns: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidTrace("no samples"));
        }
        if !(dt_ps.is_finite() && dt_ps > 0.0) {
            return Err(Error::InvalidTrace("sample interval must be positive"));
        }
        if !t0_ns.is_finite() {
            return Err(Error::InvalidTrace("start time must be finite"));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidTrace("non-finite sample"));
        }
        if samples.iter().any(|&s| s < 0.0) {
            return Err(Error::InvalidTrace("negative optical power"));
        }
        Ok(Self { samples, dt_ps, t0_ns })
    }

    /// Builds a trace from samples that may be signed (filter outputs,
    /// synthetic test signals). Only finiteness is checked.
    pub fn signed(samples: Vec<f64>, dt_ps: f64, t0_ns: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidTrace("no samples"));
        }
        if !(dt_ps.is_finite() && dt_ps > 0.0) {
            return Err(Error::InvalidTrace("sample interval must be positive"));
        }
        if !t0_ns.is_finite() || samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidTrace("non-finite value"));
        }
        Ok(Self { samples, dt_ps, t0_ns })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt_ps(&self) -> f64 {
        self.dt_ps
    }

    /// Sample interval in nanoseconds.
    pub fn dt_ns(&self) -> f64 {
        self.dt_ps * 1e-3
    }

    pub fn t0_ns(&self) -> f64 {
        self.t0_ns
    }

    /// Sample rate in GS/s.
    pub fn sample_rate(&self) -> f64 {
        1.0 / self.dt_ns()
    }

    pub fn nyquist_ghz(&self) -> f64 {
        0.5 * self.sample_rate()
    }

    /// Time of sample `k` in nanoseconds.
    pub fn time_ns(&self, k: usize) -> f64 {
        self.t0_ns + k as f64 * self.dt_ns()
    }

    pub fn duration_ns(&self) -> f64 {
        self.samples.len() as f64 * self.dt_ns()
    }

    /// Same timing, new samples.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        Self::signed(samples, self.dt_ps, self.t0_ns)
    }

    /// Multiplies every sample by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { samples: self.samples.iter().map(|s| s * factor).collect(), dt_ps: self.dt_ps, t0_ns: self.t0_ns }
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_and_empty() {
        assert!(TimeTrace::new(vec![], 1.0, 0.0).is_err());
        assert!(TimeTrace::new(vec![1.0, -0.5], 1.0, 0.0).is_err());
        assert!(TimeTrace::new(vec![1.0, f64::NAN], 1.0, 0.0).is_err());
        assert!(TimeTrace::signed(vec![1.0, -0.5], 1.0, 0.0).is_ok());
    }

    #[test]
    fn timing() {
        let t = TimeTrace::new(vec![0.0; 10], 2.0, 1.0).unwrap();
        assert_eq!(t.sample_rate(), 500.0);
        assert!((t.time_ns(5) - 1.01).abs() < 1e-12);
    }
}
