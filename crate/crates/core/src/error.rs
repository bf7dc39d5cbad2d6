use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },
    #[error("integration diverged at t = {time_ns} ns")]
    IntegrationDiverged { time_ns: f64 },
    #[error("time trace is invalid: {0}")]
    InvalidTrace(&'static str),
    #[error("analysis frequency {freq_ghz} GHz is at or above the Nyquist frequency {nyquist_ghz} GHz")]
    AboveNyquist { freq_ghz: f64, nyquist_ghz: f64 },
    #[error("frequency grid is invalid: {0}")]
    InvalidGrid(&'static str),
    #[error("mean scalogram ratio is undefined: every row is zero")]
    UndefinedRatio,
    #[error("bandwidth is undefined: spectrum holds no power outside DC")]
    UndefinedBandwidth,
    #[error("band-pass design failed: {0}")]
    FilterDesign(&'static str),
    #[error("sample rate mismatch: filter designed for {designed} GS/s, trace sampled at {actual} GS/s")]
    SampleRateMismatch { designed: f64, actual: f64 },
    #[error("extraction requires a positive detection report")]
    NotDetected,
}
