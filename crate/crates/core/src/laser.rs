//! Lang-Kobayashi rate equations for a single-mode semiconductor laser with
//! delayed optical feedback.
//!
//! State is `(S, phi, N)`: photon density, optical phase and carrier
//! density. Time runs in nanoseconds inside the integrator; the step and the
//! output sampling interval are given in picoseconds.
//!
//! The delay is handled with a ring buffer of past `(S, phi)` grid values.
//! Fourth-order Runge-Kutta needs the delayed state at half steps, which is
//! interpolated linearly between the two neighbouring grid points.

use core::f64::consts::PI;

use crate::prelude::*;
use crate::{Error, Result, TimeTrace};

/// Speed of light in vacuum (m/s).
const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Recorded power is the photon variable times this constant.
pub const POWER_SCALE: f64 = 1.0;

/// Relative floor applied to `S` against its running mean.
const PHOTON_FLOOR: f64 = 1e-6;

/// Physical constants of the emitter. Times in ns, volumes in µm³, current
/// in mA, wavelength in nm, charge in C.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserParams {
    /// Spontaneous emission factor.
    pub beta: f64,
    /// Optical confinement factor.
    pub gamma_conf: f64,
    /// Differential gain (µm³/ns).
    pub g: f64,
    /// Transparency carrier density (µm⁻³).
    pub n0: f64,
    /// Gain saturation (µm³).
    pub eps: f64,
    /// Carrier lifetime (ns).
    pub tau_n: f64,
    /// Photon lifetime (ns).
    pub tau_p: f64,
    /// Intracavity round-trip time (ns).
    pub tau_in: f64,
    /// External-cavity feedback delay (ns).
    pub tau_fb: f64,
    /// Amplitude reflectivity of the laser facet.
    pub r: f64,
    /// Amplitude reflectivity of the external reflector.
    pub r_ext: f64,
    /// Linewidth enhancement factor.
    pub alpha: f64,
    /// Central wavelength (nm).
    pub lambda0: f64,
    /// Threshold current (mA).
    pub i_th: f64,
    /// Operating bias current (mA).
    pub i_bias: f64,
    /// Active layer volume (µm³).
    pub volume: f64,
    /// Elementary charge (C).
    pub q: f64,
}

impl Default for LaserParams {
    /// The 1550 nm emitter used throughout this crate, biased at
    /// [`LaserParams::DEFAULT_BIAS_RATIO`] times threshold.
    fn default() -> Self {
        let i_th = 12.0;
        Self {
            beta: 1e-5,
            gamma_conf: 0.4,
            g: 2.125e-3,
            n0: 4e5,
            eps: 3e-5,
            tau_n: 2.0,
            tau_p: 2e-3,
            tau_in: 9e-3,
            tau_fb: 4.0,
            r: 0.3,
            r_ext: 0.01,
            alpha: 5.5,
            lambda0: 1550.0,
            i_th,
            i_bias: Self::DEFAULT_BIAS_RATIO * i_th,
            volume: 150.0,
            q: 1.602_176_634e-19,
        }
    }
}

impl LaserParams {
    /// Bias current over threshold current for the default emitter. Chosen
    /// so the carrier's 80 % energy bandwidth lands near 6 GHz.
    pub const DEFAULT_BIAS_RATIO: f64 = 3.2;

    /// Feedback strength `(1 - r²) r_ext / r`.
    pub fn feedback_strength(&self) -> f64 {
        (1.0 - self.r * self.r) * self.r_ext / self.r
    }

    /// Feedback phase `2π τ c / λ`, reduced to `[0, 2π)`.
    pub fn feedback_phase(&self) -> f64 {
        // τ[ns]·c / λ[nm] is the number of optical cycles in the delay.
        let cycles = self.tau_fb * SPEED_OF_LIGHT / self.lambda0;
        2.0 * PI * (cycles - cycles.floor())
    }

    /// Carrier injection rate `I / (qV)` in µm⁻³ ns⁻¹ for a current in mA.
    pub fn pump_rate(&self, current_ma: f64) -> f64 {
        current_ma * 1e-3 / (self.q * self.volume) * 1e-9
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, reason: "must be finite and > 0" })
            }
        }
        fn finite(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, reason: "must be finite" })
            }
        }
        positive("tau_n", self.tau_n)?;
        positive("tau_p", self.tau_p)?;
        positive("tau_in", self.tau_in)?;
        positive("tau_fb", self.tau_fb)?;
        positive("volume", self.volume)?;
        positive("lambda0", self.lambda0)?;
        positive("q", self.q)?;
        positive("i_th", self.i_th)?;
        positive("g", self.g)?;
        finite("beta", self.beta)?;
        finite("gamma_conf", self.gamma_conf)?;
        finite("n0", self.n0)?;
        finite("eps", self.eps)?;
        finite("alpha", self.alpha)?;
        if !(self.i_bias.is_finite() && self.i_bias >= 0.0) {
            return Err(Error::InvalidParameter { name: "i_bias", reason: "must be finite and >= 0" });
        }
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(Error::InvalidParameter { name: "r", reason: "must lie in (0, 1)" });
        }
        if !(self.r_ext >= 0.0 && self.r_ext < 1.0) {
            return Err(Error::InvalidParameter { name: "r_ext", reason: "must lie in [0, 1)" });
        }
        let kappa = self.feedback_strength();
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(Error::InvalidParameter { name: "r_ext", reason: "feedback strength must be finite and >= 0" });
        }
        Ok(())
    }
}

/// Initial point of the integration. The history on `[-τ, 0]` is held
/// constant at this point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    /// Photon density, > 0.
    pub photons: f64,
    /// Carrier density.
    pub carriers: f64,
    pub phase: f64,
}

impl InitialState {
    /// `S = 1`, `N = 1.1 N₀`, `φ = 0`.
    pub fn for_params(params: &LaserParams) -> Self {
        Self { photons: 1.0, carriers: 1.1 * params.n0, phase: 0.0 }
    }
}

/// Integration and recording settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Integration step (ps).
    pub dt_ps: f64,
    /// Total simulated time (ns), transient included.
    pub duration_ns: f64,
    /// Initial span that is integrated but not recorded (ns).
    pub transient_ns: f64,
    /// Integration steps per recorded sample.
    pub record_stride: usize,
    pub init: InitialState,
}

impl SimConfig {
    pub fn for_params(params: &LaserParams) -> Self {
        Self {
            dt_ps: 1.0,
            duration_ns: 80.0,
            transient_ns: 40.0,
            record_stride: 1,
            init: InitialState::for_params(params),
        }
    }

    pub fn dt_ns(&self) -> f64 {
        self.dt_ps * 1e-3
    }

    pub fn total_steps(&self) -> usize {
        (self.duration_ns / self.dt_ns()).round() as usize
    }

    pub fn transient_steps(&self) -> usize {
        (self.transient_ns / self.dt_ns()).round() as usize
    }

    /// Number of recorded samples.
    pub fn trace_len(&self) -> usize {
        let span = self.duration_ns - self.transient_ns;
        (span / (self.dt_ns() * self.record_stride as f64) + 1e-9).floor() as usize
    }

    /// Delay expressed in integration steps. Fails unless `dt` divides the
    /// delay exactly.
    pub fn delay_steps(&self, params: &LaserParams) -> Result<usize> {
        let ratio = params.tau_fb / self.dt_ns();
        let steps = ratio.round();
        if steps < 1.0 || (ratio - steps).abs() > 1e-6 * ratio.max(1.0) {
            return Err(Error::InvalidParameter { name: "dt_ps", reason: "must divide the feedback delay exactly" });
        }
        Ok(steps as usize)
    }

    pub fn validate(&self, params: &LaserParams) -> Result<()> {
        if !(self.dt_ps.is_finite() && self.dt_ps > 0.0) {
            return Err(Error::InvalidParameter { name: "dt_ps", reason: "must be finite and > 0" });
        }
        if !(self.duration_ns.is_finite() && self.duration_ns > 0.0) {
            return Err(Error::InvalidParameter { name: "duration_ns", reason: "must be finite and > 0" });
        }
        if !(self.transient_ns >= 0.0 && self.transient_ns < self.duration_ns) {
            return Err(Error::InvalidParameter { name: "transient_ns", reason: "must lie in [0, duration)" });
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidParameter { name: "record_stride", reason: "must be >= 1" });
        }
        if !(self.init.photons.is_finite() && self.init.photons > 0.0) {
            return Err(Error::InvalidParameter { name: "init.photons", reason: "must be finite and > 0" });
        }
        if !(self.init.carriers.is_finite() && self.init.phase.is_finite()) {
            return Err(Error::InvalidParameter { name: "init", reason: "must be finite" });
        }
        if self.trace_len() == 0 {
            return Err(Error::InvalidParameter { name: "duration_ns", reason: "records no samples" });
        }
        self.delay_steps(params).map(|_| ())
    }
}

/// Bias current as a function of time (ns, measured from the end of the
/// transient, so the integration starts at `-transient`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriveWaveform {
    /// `I(t) = i_bias` of the laser parameters.
    Bias,
    Constant(f64),
    /// `I(t) = bias (1 + depth sin(2π f t + phase))`.
    Sinusoid {
        bias_ma: f64,
        depth: f64,
        freq_ghz: f64,
        phase: f64,
    },
}

impl DriveWaveform {
    #[inline]
    pub fn current(&self, params: &LaserParams, t_ns: f64) -> f64 {
        match *self {
            DriveWaveform::Bias => params.i_bias,
            DriveWaveform::Constant(i) => i,
            DriveWaveform::Sinusoid { bias_ma, depth, freq_ghz, phase } => {
                bias_ma * (1.0 + depth * (2.0 * PI * freq_ghz * t_ns + phase).sin())
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            DriveWaveform::Bias => true,
            DriveWaveform::Constant(i) => i.is_finite() && i >= 0.0,
            DriveWaveform::Sinusoid { bias_ma, depth, freq_ghz, phase } => {
                bias_ma.is_finite()
                    && bias_ma >= 0.0
                    && (0.0..=1.0).contains(&depth)
                    && freq_ghz.is_finite()
                    && phase.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter { name: "drive", reason: "current must stay finite and non-negative" })
        }
    }
}

/// Right-hand side of the rate equations with every constant precomputed.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RateEquations {
    spont: f64,
    gamma: f64,
    g: f64,
    n0: f64,
    eps: f64,
    inv_tau_n: f64,
    inv_tau_p: f64,
    half_alpha: f64,
    feedback_rate: f64,
    feedback_phase: f64,
}

/// Derivatives `(dS, dφ, dN)` plus the two feedback summands, which tests
/// use to check that they vanish without feedback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Derivatives {
    pub d: [f64; 3],
    pub feedback_photons: f64,
    pub feedback_phase: f64,
}

impl RateEquations {
    pub(crate) fn new(p: &LaserParams) -> Self {
        Self {
            spont: p.beta * p.gamma_conf / p.tau_n,
            gamma: p.gamma_conf,
            g: p.g,
            n0: p.n0,
            eps: p.eps,
            inv_tau_n: 1.0 / p.tau_n,
            inv_tau_p: 1.0 / p.tau_p,
            half_alpha: 0.5 * p.alpha,
            feedback_rate: p.feedback_strength() / p.tau_in,
            feedback_phase: p.feedback_phase(),
        }
    }

    /// `y = [S, φ, N]`, `delayed = [S(t-τ), φ(t-τ)]`, `pump = I/(qV)`.
    #[inline]
    pub(crate) fn eval(&self, y: [f64; 3], delayed: [f64; 2], pump: f64, floor: f64) -> Derivatives {
        let s = y[0].max(floor);
        let s_del = delayed[0].max(floor);
        let n = y[2];
        let gain = self.g * (n - self.n0) / (1.0 + self.eps * s);
        let theta = self.feedback_phase + y[1] - delayed[1];
        let (sin_t, cos_t) = theta.sin_cos();
        let feedback_photons = 2.0 * self.feedback_rate * (s * s_del).sqrt() * cos_t;
        let feedback_phase = -self.feedback_rate * (s_del / s).sqrt() * sin_t;
        let ds = self.spont * n + self.gamma * gain * s - s * self.inv_tau_p + feedback_photons;
        let dphi = self.half_alpha * (self.gamma * gain - self.inv_tau_p) + feedback_phase;
        let dn = pump - n * self.inv_tau_n - gain * s;
        Derivatives { d: [ds, dphi, dn], feedback_photons, feedback_phase }
    }
}

/// Past `(S, φ)` grid values covering one delay.
struct History {
    photons: Vec<f64>,
    phase: Vec<f64>,
    /// Ring index of the oldest stored value, i.e. `t - τ`.
    head: usize,
}

impl History {
    fn new(delay_steps: usize, init: &InitialState) -> Self {
        Self { photons: vec![init.photons; delay_steps + 1], phase: vec![init.phase; delay_steps + 1], head: 0 }
    }

    /// Delayed values at `t - τ` and `t + dt - τ`.
    #[inline]
    fn delayed(&self) -> ([f64; 2], [f64; 2]) {
        let next = if self.head + 1 == self.photons.len() { 0 } else { self.head + 1 };
        ([self.photons[self.head], self.phase[self.head]], [self.photons[next], self.phase[next]])
    }

    /// Drops the oldest point and appends the state at `t + dt`.
    #[inline]
    fn push(&mut self, photons: f64, phase: f64) {
        self.photons[self.head] = photons;
        self.phase[self.head] = phase;
        self.head += 1;
        if self.head == self.photons.len() {
            self.head = 0;
        }
    }
}

/// Integrates the emitter and returns the recorded power after the
/// transient.
pub fn integrate_laser(params: &LaserParams, config: &SimConfig, drive: &DriveWaveform) -> Result<TimeTrace> {
    params.validate()?;
    config.validate(params)?;
    drive.validate()?;

    let rhs = RateEquations::new(params);
    let delay_steps = config.delay_steps(params)?;
    let h = config.dt_ns();
    let total = config.total_steps();
    let transient = config.transient_steps();
    let stride = config.record_stride;
    let len = config.trace_len();
    let t_start = -config.transient_ns;

    let mut history = History::new(delay_steps, &config.init);
    let mut y = [config.init.photons, config.init.phase, config.init.carriers];
    let mut photon_sum = y[0];
    let mut samples = Vec::with_capacity(len);

    for step in 0..total {
        if step >= transient && (step - transient).is_multiple_of(stride) && samples.len() < len {
            samples.push(y[0] * POWER_SCALE);
        }
        if samples.len() == len && step >= transient {
            break;
        }

        let t = t_start + step as f64 * h;
        let floor = PHOTON_FLOOR * photon_sum / (step + 1) as f64;
        let (d0, d1) = history.delayed();
        let dmid = [0.5 * (d0[0] + d1[0]), 0.5 * (d0[1] + d1[1])];
        let p0 = params.pump_rate(drive.current(params, t));
        let pmid = params.pump_rate(drive.current(params, t + 0.5 * h));
        let p1 = params.pump_rate(drive.current(params, t + h));

        let k1 = rhs.eval(y, d0, p0, floor).d;
        let k2 = rhs.eval(axpy(y, 0.5 * h, k1), dmid, pmid, floor).d;
        let k3 = rhs.eval(axpy(y, 0.5 * h, k2), dmid, pmid, floor).d;
        let k4 = rhs.eval(axpy(y, h, k3), d1, p1, floor).d;
        for i in 0..3 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if !(y[0].is_finite() && y[1].is_finite() && y[2].is_finite()) {
            return Err(Error::IntegrationDiverged { time_ns: t + h });
        }
        y[0] = y[0].max(floor);
        photon_sum += y[0];
        history.push(y[0], y[1]);
    }
    // A recording window that ends exactly on the last step.
    if samples.len() < len {
        samples.push(y[0] * POWER_SCALE);
    }

    TimeTrace::new(samples, config.dt_ps * stride as f64, 0.0)
}

#[inline]
fn axpy(y: [f64; 3], a: f64, k: [f64; 3]) -> [f64; 3] {
    [y[0] + a * k[0], y[1] + a * k[1], y[2] + a * k[2]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feedback_strength_matches_reflectivities() {
        let p = LaserParams::default();
        assert!((p.feedback_strength() - 0.91 * 0.01 / 0.3).abs() < 1e-15);
        let p0 = LaserParams { r_ext: 0.0, ..p };
        assert_eq!(p0.feedback_strength(), 0.0);
    }

    #[test]
    fn threshold_current_is_consistent_with_gain() {
        // Steady state at threshold: Γ g (N_th - N0) = 1/τp and I_th = qV N_th / τN.
        let p = LaserParams::default();
        let n_th = p.n0 + 1.0 / (p.gamma_conf * p.g * p.tau_p);
        let i_th = n_th / p.tau_n / p.pump_rate(1.0);
        assert!((i_th - p.i_th).abs() / p.i_th < 0.02, "{i_th}");
    }

    #[test]
    fn feedback_terms_vanish_without_feedback() {
        let p = LaserParams { r_ext: 0.0, ..LaserParams::default() };
        let rhs = RateEquations::new(&p);
        for (s, phi, sd, phid) in [(1.0, 0.3, 200.0, -2.0), (350.0, 10.0, 0.5, 4.0)] {
            let d = rhs.eval([s, phi, 1e6], [sd, phid], 7e5, 0.0);
            assert_eq!(d.feedback_photons, 0.0);
            assert_eq!(d.feedback_phase, 0.0);
        }
    }

    #[test]
    fn rejects_step_not_dividing_delay() {
        let p = LaserParams::default();
        let cfg = SimConfig { dt_ps: 0.7, ..SimConfig::for_params(&p) };
        assert!(matches!(
            integrate_laser(&p, &cfg, &DriveWaveform::Bias),
            Err(Error::InvalidParameter { name: "dt_ps", .. })
        ));
    }

    #[test]
    fn rejects_bad_config() {
        let p = LaserParams::default();
        let base = SimConfig::for_params(&p);
        for cfg in [
            SimConfig { transient_ns: 80.0, ..base },
            SimConfig { record_stride: 0, ..base },
            SimConfig { dt_ps: -1.0, ..base },
        ] {
            assert!(integrate_laser(&p, &cfg, &DriveWaveform::Bias).is_err());
        }
        let bad = LaserParams { r: 0.0, ..p };
        assert!(integrate_laser(&bad, &base, &DriveWaveform::Bias).is_err());
    }

    #[test]
    fn trace_length_follows_stride() {
        let p = LaserParams::default();
        let cfg = SimConfig { duration_ns: 10.0, transient_ns: 2.0, record_stride: 3, ..SimConfig::for_params(&p) };
        let tr = integrate_laser(&p, &cfg, &DriveWaveform::Bias).unwrap();
        assert_eq!(tr.len(), (8000.0f64 / 3.0).floor() as usize);
        assert_eq!(tr.dt_ps(), 3.0);
    }

    #[test]
    fn divergence_is_reported() {
        // A huge negative gain saturation makes the gain denominator cross zero.
        let p = LaserParams { eps: -1.0, ..LaserParams::default() };
        let cfg = SimConfig { duration_ns: 10.0, transient_ns: 0.0, ..SimConfig::for_params(&p) };
        match integrate_laser(&p, &cfg, &DriveWaveform::Bias) {
            Err(Error::IntegrationDiverged { time_ns }) => assert!(time_ns > -1.0),
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
