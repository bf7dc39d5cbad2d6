//! Flat `key=value` run configuration.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Keys are namespaced by the type they fill (`laser.`, `sim.`, `message.`,
//! `attack.`, `sweep.`). Unknown or repeated keys are errors, so a typo
//! never silently falls back to a default.

use std::fmt::Write as _;
use std::str::FromStr;

use chaostap::attack::AttackConfig;
use chaostap::encrypt::{MessageSpec, Scheme};
use chaostap::laser::{LaserParams, SimConfig};
use chaostap::tfa::FrequencyGrid;
use thiserror::Error;

use crate::sweep::SweepPlan;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key=value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: bad value for `{key}`: {reason}")]
    Value { line: usize, key: String, reason: String },
    #[error("invalid configuration: {0}")]
    Invalid(#[from] chaostap::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub laser: LaserParams,
    pub sim: SimConfig,
    pub message: MessageSpec,
    pub attack: AttackConfig,
    pub sweep: SweepPlan,
    /// Seeds the initial-state perturbation; `None` keeps the default state.
    pub seed: Option<u64>,
    pub threshold: Option<f64>,
}

impl Default for Config {
    fn default() -> Self {
        let laser = LaserParams::default();
        Self {
            sim: SimConfig::for_params(&laser),
            laser,
            message: MessageSpec::new(Scheme::Cma, 1.0, 0.05).expect("valid default message"),
            attack: AttackConfig::default(),
            sweep: SweepPlan::default(),
            seed: None,
            threshold: None,
        }
    }
}

/// Grid keys are collected first and applied together.
#[derive(Default)]
struct GridKeys {
    start: Option<f64>,
    step: Option<f64>,
    count: Option<usize>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Config::default();
        let mut seen: Vec<String> = Vec::new();
        let mut grid = GridKeys::default();
        let mut init_carriers_set = false;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(ConfigError::Syntax { line });
            }
            if seen.iter().any(|k| k == key) {
                return Err(ConfigError::Duplicate { line, key: key.to_string() });
            }
            seen.push(key.to_string());

            let bad = |reason: &str| ConfigError::Value { line, key: key.to_string(), reason: reason.to_string() };
            let num = || value.parse::<f64>().map_err(|_| bad("not a number"));
            let uint = || value.parse::<usize>().map_err(|_| bad("not a non-negative integer"));

            let l = &mut cfg.laser;
            match key {
                "laser.beta" => l.beta = num()?,
                "laser.gamma_conf" => l.gamma_conf = num()?,
                "laser.g" => l.g = num()?,
                "laser.n0" => l.n0 = num()?,
                "laser.eps" => l.eps = num()?,
                "laser.tau_n" => l.tau_n = num()?,
                "laser.tau_p" => l.tau_p = num()?,
                "laser.tau_in" => l.tau_in = num()?,
                "laser.tau_fb" => l.tau_fb = num()?,
                "laser.r" => l.r = num()?,
                "laser.r_ext" => l.r_ext = num()?,
                "laser.alpha" => l.alpha = num()?,
                "laser.lambda0" => l.lambda0 = num()?,
                "laser.i_th" => l.i_th = num()?,
                "laser.i_bias" => l.i_bias = num()?,
                "laser.volume" => l.volume = num()?,
                "laser.q" => l.q = num()?,
                "sim.dt_ps" => cfg.sim.dt_ps = num()?,
                "sim.duration_ns" => cfg.sim.duration_ns = num()?,
                "sim.transient_ns" => cfg.sim.transient_ns = num()?,
                "sim.record_stride" => cfg.sim.record_stride = uint()?,
                "sim.init_photons" => cfg.sim.init.photons = num()?,
                "sim.init_carriers" => {
                    cfg.sim.init.carriers = num()?;
                    init_carriers_set = true;
                }
                "sim.init_phase" => cfg.sim.init.phase = num()?,
                "message.scheme" => {
                    cfg.message.scheme = Scheme::from_str(value).map_err(|_| bad("expected cma or cmo"))?
                }
                "message.freq_ghz" => cfg.message.freq_ghz = num()?,
                "message.md" => cfg.message.md = num()?,
                "message.phase" => cfg.message.phase = num()?,
                "attack.fb" => cfg.attack.wavelet.fb = num()?,
                "attack.fc" => cfg.attack.wavelet.fc = num()?,
                "attack.grid_start_ghz" => grid.start = Some(num()?),
                "attack.grid_step_ghz" => grid.step = Some(num()?),
                "attack.grid_count" => grid.count = Some(uint()?),
                "attack.margin_db" => cfg.attack.margin_db = num()?,
                "attack.bpf_width_ghz" => cfg.attack.bpf.width = num()?,
                "attack.bpf_ripple_db" => cfg.attack.bpf.ripple_db = num()?,
                "attack.bpf_attenuation_db" => cfg.attack.bpf.attenuation_db = num()?,
                "attack.bpf_stop_offset_ghz" => cfg.attack.bpf.stop_offset = num()?,
                "sweep.scheme" => cfg.sweep.scheme = Scheme::from_str(value).map_err(|_| bad("expected cma or cmo"))?,
                "sweep.frequencies_ghz" => cfg.sweep.frequencies = list(value).map_err(&bad)?,
                "sweep.md_values" => cfg.sweep.md_values = list(value).map_err(&bad)?,
                "sweep.repetitions" => cfg.sweep.repetitions = uint()?,
                "seed" => cfg.seed = Some(value.parse().map_err(|_| bad("expected an unsigned 64-bit integer"))?),
                "threshold" => cfg.threshold = Some(num()?),
                _ => return Err(ConfigError::UnknownKey { line, key: key.to_string() }),
            }
        }

        // The default carrier start tracks a changed transparency density.
        if !init_carriers_set {
            cfg.sim.init.carriers = 1.1 * cfg.laser.n0;
        }
        if grid.start.is_some() || grid.step.is_some() || grid.count.is_some() {
            let d = FrequencyGrid::default();
            cfg.attack.grid = FrequencyGrid::uniform(
                grid.start.unwrap_or(d.freqs()[0]),
                grid.step.unwrap_or(d.spacing()),
                grid.count.unwrap_or(d.len()),
            )?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.laser.validate()?;
        self.sim.validate(&self.laser)?;
        self.message.validate()?;
        self.attack.validate()?;
        self.sweep.validate()?;
        Ok(())
    }

    /// Every key with its current value, parseable by [`Config::parse`].
    pub fn render(&self) -> String {
        let l = &self.laser;
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        for (k, v) in [
            ("laser.beta", l.beta),
            ("laser.gamma_conf", l.gamma_conf),
            ("laser.g", l.g),
            ("laser.n0", l.n0),
            ("laser.eps", l.eps),
            ("laser.tau_n", l.tau_n),
            ("laser.tau_p", l.tau_p),
            ("laser.tau_in", l.tau_in),
            ("laser.tau_fb", l.tau_fb),
            ("laser.r", l.r),
            ("laser.r_ext", l.r_ext),
            ("laser.alpha", l.alpha),
            ("laser.lambda0", l.lambda0),
            ("laser.i_th", l.i_th),
            ("laser.i_bias", l.i_bias),
            ("laser.volume", l.volume),
            ("laser.q", l.q),
            ("sim.dt_ps", self.sim.dt_ps),
            ("sim.duration_ns", self.sim.duration_ns),
            ("sim.transient_ns", self.sim.transient_ns),
        ] {
            put(k, format!("{v:?}"));
        }
        put("sim.record_stride", self.sim.record_stride.to_string());
        put("sim.init_photons", format!("{:?}", self.sim.init.photons));
        put("sim.init_carriers", format!("{:?}", self.sim.init.carriers));
        put("sim.init_phase", format!("{:?}", self.sim.init.phase));
        put("message.scheme", self.message.scheme.as_str().to_string());
        put("message.freq_ghz", format!("{:?}", self.message.freq_ghz));
        put("message.md", format!("{:?}", self.message.md));
        put("message.phase", format!("{:?}", self.message.phase));
        let a = &self.attack;
        put("attack.fb", format!("{:?}", a.wavelet.fb));
        put("attack.fc", format!("{:?}", a.wavelet.fc));
        put("attack.grid_start_ghz", format!("{:?}", a.grid.freqs()[0]));
        put("attack.grid_step_ghz", format!("{:?}", a.grid.spacing()));
        put("attack.grid_count", a.grid.len().to_string());
        put("attack.margin_db", format!("{:?}", a.margin_db));
        put("attack.bpf_width_ghz", format!("{:?}", a.bpf.width));
        put("attack.bpf_ripple_db", format!("{:?}", a.bpf.ripple_db));
        put("attack.bpf_attenuation_db", format!("{:?}", a.bpf.attenuation_db));
        put("attack.bpf_stop_offset_ghz", format!("{:?}", a.bpf.stop_offset));
        put("sweep.scheme", self.sweep.scheme.as_str().to_string());
        put("sweep.frequencies_ghz", join(&self.sweep.frequencies));
        put("sweep.md_values", join(&self.sweep.md_values));
        put("sweep.repetitions", self.sweep.repetitions.to_string());
        if let Some(s) = self.seed {
            put("seed", s.to_string());
        }
        if let Some(t) = self.threshold {
            put("threshold", format!("{t:?}"));
        }
        out
    }
}

fn list(value: &str) -> Result<Vec<f64>, &'static str> {
    let v: Result<Vec<f64>, _> = value.split(',').map(|s| s.trim().parse::<f64>()).collect();
    match v {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err("expected a comma-separated list of numbers"),
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(Config::parse("").unwrap(), Config::default());
        assert_eq!(Config::parse("# only a comment\n\n").unwrap(), Config::default());
    }

    #[test]
    fn render_round_trips() {
        let mut cfg =
            Config::parse("laser.r_ext=0.02\nmessage.scheme=cmo\nseed=42\nsweep.md_values=0.01,0.04").unwrap();
        cfg.threshold = Some(0.0123);
        assert_eq!(Config::parse(&cfg.render()).unwrap(), cfg);
    }

    #[test]
    fn errors_name_the_line() {
        assert_eq!(
            Config::parse("laser.r=0.3\nlaser.rr=1").unwrap_err(),
            ConfigError::UnknownKey { line: 2, key: "laser.rr".into() }
        );
        assert_eq!(Config::parse("\nseed").unwrap_err(), ConfigError::Syntax { line: 2 });
        assert!(matches!(Config::parse("sim.dt_ps=fast"), Err(ConfigError::Value { line: 1, .. })));
        assert!(matches!(Config::parse("seed=1\nseed=2"), Err(ConfigError::Duplicate { line: 2, .. })));
        assert!(matches!(Config::parse("sim.dt_ps=0.3"), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn grid_keys_combine() {
        let cfg = Config::parse("attack.grid_start_ghz=0.5\nattack.grid_count=20").unwrap();
        assert_eq!(cfg.attack.grid.len(), 20);
        assert_eq!(cfg.attack.grid.freqs()[0], 0.5);
        assert!((cfg.attack.grid.spacing() - 0.05).abs() < 1e-12);
    }

    #[test]
    fn carriers_follow_transparency_density() {
        let cfg = Config::parse("laser.n0=5e5").unwrap();
        assert_eq!(cfg.sim.init.carriers, 1.1 * 5e5);
    }
}
