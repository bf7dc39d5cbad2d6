//! Scheme × frequency × depth × repetition grid of attack runs.
//!
//! Every repetition starts the emitter from its own seeded initial state.
//! Its carrier is simulated once, calibrates that repetition's threshold
//! (unless a fixed one is configured) and, under chaos masking, carries all
//! of the repetition's messages. Cells run on a rayon pool; results are
//! sorted by cell key before they are written, so the output does not
//! depend on the worker count.

use std::fmt::Write as _;

use chaostap::attack::{calibrate_threshold, detect, extract_at, AttackConfig};
use chaostap::encrypt::{encrypt_cma, encrypt_cmo, MessageSpec, Scheme};
use chaostap::laser::{integrate_laser, DriveWaveform, LaserParams, SimConfig};
use chaostap::{Error, TimeTrace};
use rayon::prelude::*;

use crate::config::Config;
use crate::seed::initial_state;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub scheme: Scheme,
    pub frequencies: Vec<f64>,
    pub md_values: Vec<f64>,
    pub repetitions: usize,
}

impl Default for SweepPlan {
    fn default() -> Self {
        Self {
            scheme: Scheme::Cma,
            frequencies: vec![1.0, 2.0, 4.0],
            md_values: vec![0.01, 0.02, 0.03, 0.04, 0.05],
            repetitions: 3,
        }
    }
}

impl SweepPlan {
    pub fn validate(&self) -> chaostap::Result<()> {
        if self.frequencies.is_empty() || self.md_values.is_empty() {
            return Err(Error::InvalidParameter {
                name: "sweep",
                reason: "frequency and depth lists must be non-empty",
            });
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidParameter { name: "sweep.repetitions", reason: "must be >= 1" });
        }
        for &f in &self.frequencies {
            MessageSpec::new(self.scheme, f, 0.0)?;
        }
        for &md in &self.md_values {
            MessageSpec::new(self.scheme, 1.0, md)?;
        }
        Ok(())
    }

    pub fn record_count(&self) -> usize {
        self.frequencies.len() * self.md_values.len() * self.repetitions
    }
}

/// Result of one cell that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcome {
    pub psl: f64,
    pub threshold: f64,
    pub detected: bool,
    pub est_freq: Option<f64>,
    /// Band-pass center: the detected frequency, else the true one.
    pub center: f64,
    pub snr_true: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellRecord {
    pub freq_ghz: f64,
    pub md: f64,
    pub rep: usize,
    /// `Err` holds a short error tag.
    pub outcome: Result<CellOutcome, String>,
}

impl CellRecord {
    fn key(&self) -> (f64, f64, usize) {
        (self.freq_ghz, self.md, self.rep)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Some(Self { mean, min, max })
    }
}

/// Per-cell statistics over the repetitions that completed.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub freq_ghz: f64,
    pub md: f64,
    pub completed: usize,
    pub detected: usize,
    pub psl: Option<Stats>,
    pub snr_true: Option<Stats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub plan: SweepPlan,
    pub seed: u64,
    /// Fixed threshold, or `None` when each repetition calibrated its own.
    pub fixed_threshold: Option<f64>,
    pub records: Vec<CellRecord>,
    pub aggregates: Vec<Aggregate>,
}

/// Short stable tag for an error, written into the failing row.
pub fn error_tag(e: &Error) -> &'static str {
    match e {
        Error::InvalidParameter { .. } => "invalid-parameter",
        Error::IntegrationDiverged { .. } => "integration-diverged",
        Error::InvalidTrace(_) => "invalid-trace",
        Error::AboveNyquist { .. } => "above-nyquist",
        Error::InvalidGrid(_) => "invalid-grid",
        Error::UndefinedRatio => "undefined-ratio",
        Error::UndefinedBandwidth => "undefined-bandwidth",
        Error::FilterDesign(_) => "filter-design",
        Error::SampleRateMismatch { .. } => "sample-rate-mismatch",
        Error::NotDetected => "not-detected",
    }
}

struct Repetition {
    sim: SimConfig,
    carrier: Result<(TimeTrace, f64), Error>,
}

fn repetition(cfg: &Config, seed: u64, rep: usize) -> Repetition {
    let sim = SimConfig { init: initial_state(&cfg.laser, seed, rep as u64), ..cfg.sim };
    let carrier = integrate_laser(&cfg.laser, &sim, &DriveWaveform::Bias).and_then(|c| {
        let th = match cfg.threshold {
            Some(t) => t,
            None => calibrate_threshold(&c, &cfg.attack)?,
        };
        Ok((c, th))
    });
    Repetition { sim, carrier }
}

/// One attack run: encrypt, detect, then band-pass at the detected
/// frequency, or at the true one when nothing was detected.
pub fn run_cell(
    params: &LaserParams,
    sim: &SimConfig,
    carrier: &TimeTrace,
    threshold: f64,
    attack: &AttackConfig,
    msg: &MessageSpec,
) -> chaostap::Result<CellOutcome> {
    let trace = match msg.scheme {
        Scheme::Cma => encrypt_cma(carrier, msg)?,
        Scheme::Cmo => encrypt_cmo(params, sim, msg)?,
    };
    let report = detect(&trace, attack, threshold)?;
    let center = report.est_freq.unwrap_or(msg.freq_ghz);
    let extraction = extract_at(&trace, center, attack, Some(msg))?;
    Ok(CellOutcome {
        psl: report.psl,
        threshold,
        detected: report.detected,
        est_freq: report.est_freq,
        center,
        snr_true: extraction.snr_true.expect("truth was supplied"),
    })
}

pub fn run_sweep(cfg: &Config, seed: u64, workers: usize) -> anyhow::Result<SweepResult> {
    let plan = cfg.sweep.clone();
    plan.validate()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;

    let mut records = pool.install(|| {
        let reps: Vec<Repetition> = (0..plan.repetitions).into_par_iter().map(|r| repetition(cfg, seed, r)).collect();
        let cells: Vec<(f64, f64, usize)> = plan
            .frequencies
            .iter()
            .flat_map(|&f| plan.md_values.iter().flat_map(move |&md| (0..plan.repetitions).map(move |r| (f, md, r))))
            .collect();
        cells
            .into_par_iter()
            .map(|(f, md, rep)| {
                let r = &reps[rep];
                let outcome = r.carrier.as_ref().map_err(|e| error_tag(e).to_string()).and_then(|(carrier, th)| {
                    let msg = MessageSpec { freq_ghz: f, md, scheme: plan.scheme, phase: cfg.message.phase };
                    run_cell(&cfg.laser, &r.sim, carrier, *th, &cfg.attack, &msg).map_err(|e| error_tag(&e).to_string())
                });
                CellRecord { freq_ghz: f, md, rep, outcome }
            })
            .collect::<Vec<_>>()
    });
    records.sort_by(|a, b| a.key().partial_cmp(&b.key()).expect("finite keys"));

    let aggregates = records
        .chunk_by(|a, b| a.freq_ghz == b.freq_ghz && a.md == b.md)
        .map(|cell| {
            let ok: Vec<&CellOutcome> = cell.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
            let psl: Vec<f64> = ok.iter().map(|o| o.psl).collect();
            let snr: Vec<f64> = ok.iter().map(|o| o.snr_true).collect();
            Aggregate {
                freq_ghz: cell[0].freq_ghz,
                md: cell[0].md,
                completed: ok.len(),
                detected: ok.iter().filter(|o| o.detected).count(),
                psl: Stats::of(&psl),
                snr_true: Stats::of(&snr),
            }
        })
        .collect();

    Ok(SweepResult { plan, seed, fixed_threshold: cfg.threshold, records, aggregates })
}

const CSV_HEADER: &str =
    "kind,scheme,freq_ghz,md,rep,psl_db,threshold_db,detected,est_freq_ghz,center_ghz,snr_true_db,error";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

impl SweepResult {
    /// One `record` row per cell and repetition, then `mean`, `min` and `max`
    /// rows per cell. The `detected` column of a `mean` row is the detected
    /// fraction.
    pub fn to_csv(&self) -> String {
        let scheme = self.plan.scheme.as_str();
        let mut out = String::new();
        let _ = writeln!(out, "# seed={}", self.seed);
        let _ = writeln!(out, "# scheme={scheme}");
        match self.fixed_threshold {
            Some(t) => {
                let _ = writeln!(out, "# threshold={t:?}");
            }
            None => out.push_str("# threshold=calibrated per repetition\n"),
        }
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let (f, md, rep) = (r.freq_ghz, r.md, r.rep);
            match &r.outcome {
                Ok(o) => {
                    let _ = writeln!(
                        out,
                        "record,{scheme},{f:?},{md:?},{rep},{:?},{:?},{},{},{:?},{:?},",
                        o.psl,
                        o.threshold,
                        o.detected,
                        opt(o.est_freq),
                        o.center,
                        o.snr_true
                    );
                }
                Err(tag) => {
                    let _ = writeln!(out, "record,{scheme},{f:?},{md:?},{rep},,,,,,,{tag}");
                }
            }
        }
        for a in &self.aggregates {
            let (f, md) = (a.freq_ghz, a.md);
            let frac =
                if a.completed > 0 { format!("{:?}", a.detected as f64 / a.completed as f64) } else { String::new() };
            for (kind, pick) in [("mean", 0), ("min", 1), ("max", 2)] {
                let get = |s: Option<Stats>| opt(s.map(|s| [s.mean, s.min, s.max][pick]));
                let det = if pick == 0 { frac.as_str() } else { "" };
                let _ = writeln!(out, "{kind},{scheme},{f:?},{md:?},,{},,{det},,,{},", get(a.psl), get(a.snr_true));
            }
        }
        out
    }

    /// gnuplot script drawing PSL and extraction SNR against depth, one
    /// curve per message frequency, from the `mean` rows of `csv_name`.
    pub fn plot_script(&self, csv_name: &str, image_name: &str) -> String {
        let freqs = self.plan.frequencies.iter().map(|f| format!("{f:?}")).collect::<Vec<_>>().join(" ");
        let scheme = self.plan.scheme.as_str().to_uppercase();
        let mut s = String::new();
        let _ = writeln!(s, "# seed={}", self.seed);
        s.push_str("set datafile separator ','\n");
        s.push_str("set terminal pngcairo size 1100,420\n");
        let _ = writeln!(s, "set output '{image_name}'");
        s.push_str("set multiplot layout 1,2\n");
        s.push_str("set xlabel 'MD'\nset key top left\nset grid\n");
        let _ = writeln!(s, "freqs = \"{freqs}\"");
        let _ = writeln!(s, "set title '{scheme}: PSL of MSR'\nset ylabel 'PSL (dB)'");
        let _ = writeln!(
            s,
            "plot for [f in freqs] '{csv_name}' using 4:((strcol(1) eq 'mean' && $3 == real(f)) ? $6 : NaN) with linespoints title sprintf('%s GHz', f)"
        );
        let _ = writeln!(s, "set title '{scheme}: SNR of extracted message'\nset ylabel 'SNR (dB)'");
        let _ = writeln!(
            s,
            "plot for [f in freqs] '{csv_name}' using 4:((strcol(1) eq 'mean' && $3 == real(f)) ? $11 : NaN) with linespoints title sprintf('%s GHz', f)"
        );
        s.push_str("unset multiplot\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_plan_has_45_records() {
        assert_eq!(SweepPlan::default().record_count(), 45);
    }

    #[test]
    fn empty_lists_rejected() {
        let p = SweepPlan { frequencies: vec![], ..SweepPlan::default() };
        assert!(p.validate().is_err());
        let p = SweepPlan { repetitions: 0, ..SweepPlan::default() };
        assert!(p.validate().is_err());
        let p = SweepPlan { md_values: vec![1.0], ..SweepPlan::default() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn stats() {
        let s = Stats::of(&[1.0, 3.0, 2.0]).unwrap();
        assert_eq!((s.mean, s.min, s.max), (2.0, 1.0, 3.0));
        assert_eq!(Stats::of(&[]), None);
    }
}
