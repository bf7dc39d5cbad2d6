//! Command-line surface and the subcommand drivers.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use chaostap::attack::{calibrate_threshold, detect, extract, extract_at, DetectionReport, ExtractionResult};
use chaostap::dsp::{bandwidth, power_spectrum};
use chaostap::encrypt::{encrypt_cma, encrypt_cmo, Scheme};
use chaostap::laser::{integrate_laser, DriveWaveform};
use chaostap::tfa::cwt;
use chaostap::TimeTrace;
use clap::{Args, Parser, Subcommand};

use crate::config::Config;
use crate::io::{format_msr, format_psd, format_scalogram, format_trace, parse_trace, Record};
use crate::seed::{initial_state, DEFAULT_SEED};
use crate::sweep::run_sweep;

/// Steady-state test span at the end of a simulated trace (ns).
const TAIL_NS: f64 = 5.0;
/// Relative peak-to-peak level below which a trace counts as steady.
const STEADY_LEVEL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "chaostap", version, about = "Chaotic laser carrier simulation and time-frequency message detection")]
pub struct Cli {
    /// key=value configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Main output file of the subcommand.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for the sweep.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    /// Initial-state seed; overrides `seed` in the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Also write the MSR curve as CSV.
    #[arg(long, global = true)]
    pub msr_csv: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the emitter and write the carrier trace.
    Simulate {
        /// Also write the power spectrum (GHz, dB).
        #[arg(long)]
        psd_csv: Option<PathBuf>,
    },
    /// Hide the configured message and write the transmitted trace.
    Encrypt {
        /// Carrier trace for chaos masking; simulated when absent.
        #[arg(long)]
        carrier: Option<PathBuf>,
    },
    /// Run detection on a trace and print the report.
    Detect {
        #[arg(long)]
        trace: PathBuf,
        #[command(flatten)]
        threshold: ThresholdArgs,
        /// Also write the scalogram as CSV.
        #[arg(long)]
        scalogram_csv: Option<PathBuf>,
    },
    /// Detect, then band-pass the trace at the detected frequency.
    Extract {
        #[arg(long)]
        trace: PathBuf,
        #[command(flatten)]
        threshold: ThresholdArgs,
        /// Filter here instead of at the detected frequency.
        #[arg(long)]
        center: Option<f64>,
    },
    /// Run the configured frequency × depth grid and write the CSV and a
    /// gnuplot script.
    Sweep {
        /// Plot script path; defaults to the CSV path with a `.gp` extension.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Calibrate the detection threshold on a message-free carrier.
    Calibrate {
        /// Carrier trace; simulated when absent.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// Detection threshold (dB).
    #[arg(long)]
    pub threshold: Option<f64>,
    /// File holding a `threshold=` entry, e.g. the output of `calibrate`.
    #[arg(long)]
    pub threshold_file: Option<PathBuf>,
    /// Carrier trace to calibrate the threshold on.
    #[arg(long)]
    pub carrier: Option<PathBuf>,
}

pub fn run(cli: &Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => Config::parse(&read(p)?).with_context(|| format!("{}", p.display()))?,
        None => Config::default(),
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if let Some(seed) = cfg.seed {
        cfg.sim.init = initial_state(&cfg.laser, seed, 0);
    }

    match &cli.command {
        Command::Simulate { psd_csv } => simulate(cli, &cfg, psd_csv.as_deref()),
        Command::Encrypt { carrier } => encrypt(cli, &cfg, carrier.as_deref()),
        Command::Detect { trace, threshold, scalogram_csv } => {
            let tr = load_trace(trace)?;
            let th = resolve_threshold(&cfg, threshold)?;
            let report = detect(&tr, &cfg.attack, th)?;
            write_msr(cli, &report)?;
            if let Some(p) = scalogram_csv {
                let sc = cwt(&tr, &cfg.attack.grid, &cfg.attack.wavelet)?;
                write(p, &format_scalogram(&sc, tr.t0_ns()))?;
            }
            let rec = report_record(&report);
            println!("{rec}");
            if let Some(p) = &cli.out {
                write(p, &format!("{rec}\n"))?;
            }
            Ok(())
        }
        Command::Extract { trace, threshold, center } => {
            let tr = load_trace(trace)?;
            let truth = Some(&cfg.message);
            let (result, report) = match center {
                Some(c) => (extract_at(&tr, *c, &cfg.attack, truth)?, None),
                None => {
                    let th = resolve_threshold(&cfg, threshold)?;
                    let report = detect(&tr, &cfg.attack, th)?;
                    write_msr(cli, &report)?;
                    if !report.detected {
                        bail!(
                            "no message detected (psl {:.6} dB <= threshold {:.6} dB); pass --center to filter anyway",
                            report.psl,
                            th
                        );
                    }
                    (extract(&tr, &report, &cfg.attack, truth)?, Some(report))
                }
            };
            println!("{}", extraction_record(&result, report.as_ref()));
            if let Some(p) = &cli.out {
                write(p, &format_trace(&result.filtered.trace))?;
            }
            Ok(())
        }
        Command::Sweep { plot } => {
            let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
            let out = cli.out.as_deref().ok_or_else(|| anyhow!("sweep needs --out for the CSV"))?;
            let result = run_sweep(&cfg, seed, cli.workers)?;
            write(out, &result.to_csv())?;
            let plot_path = plot.clone().unwrap_or_else(|| out.with_extension("gp"));
            let csv_name = out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let image =
                out.with_extension("png").file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            write(&plot_path, &result.plot_script(&csv_name, &image))?;
            let failed = result.records.iter().filter(|r| r.outcome.is_err()).count();
            println!(
                "{}",
                Record::new()
                    .with("records", result.records.len())
                    .with("failed", failed)
                    .with("seed", seed)
                    .with("csv", out.display())
                    .with("plot", plot_path.display())
            );
            Ok(())
        }
        Command::Calibrate { trace } => {
            let carrier = match trace {
                Some(p) => load_trace(p)?,
                None => integrate_laser(&cfg.laser, &cfg.sim, &DriveWaveform::Bias)?,
            };
            let th = calibrate_threshold(&carrier, &cfg.attack)?;
            let rec = Record::new().with("threshold", format!("{th:?}")).with("margin_db", cfg.attack.margin_db);
            println!("{rec}");
            if let Some(p) = &cli.out {
                write(p, &format!("threshold={th:?}\n"))?;
            }
            Ok(())
        }
    }
}

fn simulate(cli: &Cli, cfg: &Config, psd_csv: Option<&Path>) -> Result<()> {
    let tr = integrate_laser(&cfg.laser, &cfg.sim, &DriveWaveform::Bias)?;
    if let Some(p) = &cli.out {
        write(p, &format_trace(&tr))?;
    }
    let spectrum = power_spectrum(&tr).ok();
    if let (Some(p), Some(ps)) = (psd_csv, &spectrum) {
        write(p, &format_psd(ps))?;
    } else if psd_csv.is_some() {
        bail!("trace too short for a power spectrum");
    }
    let bw = spectrum.as_ref().and_then(|ps| bandwidth(ps).ok());
    let tail = tail_fluctuation(&tr);
    println!(
        "{}",
        Record::new()
            .with("samples", tr.len())
            .with("dt_ps", tr.dt_ps())
            .with("mean_power", tr.mean())
            .with("bandwidth_ghz", bw.map(|b| format!("{b:.4}")).unwrap_or_else(|| "undefined".into()))
            .with("tail_fluctuation", format!("{tail:.3e}"))
            .with("steady", tail < STEADY_LEVEL)
    );
    Ok(())
}

fn encrypt(cli: &Cli, cfg: &Config, carrier: Option<&Path>) -> Result<()> {
    let msg = &cfg.message;
    let out = match msg.scheme {
        Scheme::Cma => {
            let c = match carrier {
                Some(p) => load_trace(p)?,
                None => integrate_laser(&cfg.laser, &cfg.sim, &DriveWaveform::Bias)?,
            };
            encrypt_cma(&c, msg)?
        }
        Scheme::Cmo => {
            if carrier.is_some() {
                bail!("chaos modulation drives the emitter itself; --carrier applies to cma only");
            }
            encrypt_cmo(&cfg.laser, &cfg.sim, msg)?
        }
    };
    if let Some(p) = &cli.out {
        write(p, &format_trace(&out))?;
    }
    println!(
        "{}",
        Record::new()
            .with("scheme", msg.scheme.as_str())
            .with("freq_ghz", msg.freq_ghz)
            .with("md", msg.md)
            .with("samples", out.len())
    );
    Ok(())
}

/// Relative peak-to-peak power over the last [`TAIL_NS`].
fn tail_fluctuation(tr: &TimeTrace) -> f64 {
    let n = ((TAIL_NS / tr.dt_ns()).round() as usize).clamp(1, tr.len());
    let tail = &tr.samples()[tr.len() - n..];
    let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    if hi > 0.0 {
        (hi - lo) / hi
    } else {
        0.0
    }
}

fn resolve_threshold(cfg: &Config, args: &ThresholdArgs) -> Result<f64> {
    if let Some(t) = args.threshold {
        return Ok(t);
    }
    if let Some(p) = &args.threshold_file {
        let text = read(p)?;
        let th = Config::parse(&text).with_context(|| format!("{}", p.display()))?.threshold;
        return th.ok_or_else(|| anyhow!("{} has no threshold entry", p.display()));
    }
    if let Some(t) = cfg.threshold {
        return Ok(t);
    }
    if let Some(p) = &args.carrier {
        return Ok(calibrate_threshold(&load_trace(p)?, &cfg.attack)?);
    }
    bail!("no threshold: pass --threshold, --threshold-file or --carrier, or set `threshold` in the config")
}

fn write_msr(cli: &Cli, report: &DetectionReport) -> Result<()> {
    if let Some(p) = &cli.msr_csv {
        write(p, &format_msr(&report.msr))?;
    }
    Ok(())
}

pub fn report_record(r: &DetectionReport) -> Record {
    Record::new()
        .with("detected", r.detected)
        .with("est_freq", r.est_freq.map(|f| format!("{f:?}")).unwrap_or_else(|| "none".into()))
        .with("psl", format!("{:?}", r.psl))
        .with("threshold", format!("{:?}", r.threshold))
        .with("low_confidence", r.low_confidence)
        .with("peak_freq", format!("{:?}", r.msr.peak_freq))
}

pub fn extraction_record(e: &ExtractionResult, report: Option<&DetectionReport>) -> Record {
    let mut rec = Record::new();
    if let Some(r) = report {
        rec = rec.with("psl", format!("{:?}", r.psl)).with("threshold", format!("{:?}", r.threshold));
    }
    rec.with("center", format!("{:?}", e.center_used))
        .with("transient_samples", e.filtered.transient)
        .with("snr_detected", format!("{:.4}", e.snr_detected))
        .with("snr_true", e.snr_true.map(|s| format!("{s:.4}")).unwrap_or_else(|| "none".into()))
}

fn load_trace(p: &Path) -> Result<TimeTrace> {
    parse_trace(&read(p)?).with_context(|| format!("{}", p.display()))
}

fn read(p: &Path) -> Result<String> {
    fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))
}

fn write(p: &Path, text: &str) -> Result<()> {
    fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))
}
