//! Sinusoidal message embedding: chaos masking (CMA) multiplies the emitted
//! power, chaos modulation (CMO) modulates the bias current of the emitter.

use core::f64::consts::PI;

use crate::laser::{integrate_laser, DriveWaveform, LaserParams, SimConfig};
use crate::prelude::*;
use crate::{Error, Result, TimeTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Chaos masking: `P(t) (1 + MD sin(2πft))`.
    Cma,
    /// Chaos modulation: `I(t) = I_b (1 + MD sin(2πft))`.
    Cmo,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Cma => "CMA",
            Scheme::Cmo => "CMO",
        }
    }
}

impl core::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "CMA" | "cma" => Ok(Scheme::Cma),
            "CMO" | "cmo" => Ok(Scheme::Cmo),
            _ => Err(Error::InvalidParameter { name: "scheme", reason: "expected CMA or CMO" }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MessageSpec {
    pub freq_ghz: f64,
    /// Modulation depth in `[0, 1)`.
    pub md: f64,
    pub scheme: Scheme,
    /// Phase offset in radians; zero reproduces a plain `sin(2πft)`.
    pub phase: f64,
}

impl MessageSpec {
    pub fn new(scheme: Scheme, freq_ghz: f64, md: f64) -> Result<Self> {
        let m = Self { freq_ghz, md, scheme, phase: 0.0 };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.freq_ghz.is_finite() && self.freq_ghz > 0.0) {
            return Err(Error::InvalidParameter { name: "freq", reason: "must be finite and > 0" });
        }
        if !(self.md >= 0.0 && self.md < 1.0) {
            return Err(Error::InvalidParameter { name: "md", reason: "must lie in [0, 1)" });
        }
        if !self.phase.is_finite() {
            return Err(Error::InvalidParameter { name: "phase", reason: "must be finite" });
        }
        Ok(())
    }

    fn expect(&self, scheme: Scheme) -> Result<()> {
        self.validate()?;
        if self.scheme != scheme {
            return Err(Error::InvalidParameter { name: "scheme", reason: "message uses the other scheme" });
        }
        Ok(())
    }
}

/// Chaos masking of a recorded carrier.
pub fn encrypt_cma(carrier: &TimeTrace, msg: &MessageSpec) -> Result<TimeTrace> {
    msg.expect(Scheme::Cma)?;
    let w = 2.0 * PI * msg.freq_ghz;
    let samples: Vec<f64> = carrier
        .samples()
        .iter()
        .enumerate()
        .map(|(k, &p)| p * (1.0 + msg.md * (w * carrier.time_ns(k) + msg.phase).sin()))
        .collect();
    TimeTrace::new(samples, carrier.dt_ps(), carrier.t0_ns())
}

/// Chaos modulation: the emitter runs with the bias current modulated from
/// the first integration step, transient included.
pub fn encrypt_cmo(params: &LaserParams, config: &SimConfig, msg: &MessageSpec) -> Result<TimeTrace> {
    msg.expect(Scheme::Cmo)?;
    let drive =
        DriveWaveform::Sinusoid { bias_ma: params.i_bias, depth: msg.md, freq_ghz: msg.freq_ghz, phase: msg.phase };
    integrate_laser(params, config, &drive)
}
