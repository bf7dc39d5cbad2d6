use std::f64::consts::PI;

use chaostap::attack::{calibrate_threshold, detect, extract, extract_at, AttackConfig};
use chaostap::dsp::{apply_bpf, design_bpf, power_spectrum, snr, BpfSpec};
use chaostap::encrypt::{encrypt_cma, encrypt_cmo, MessageSpec, Scheme};
use chaostap::laser::{integrate_laser, DriveWaveform, LaserParams, SimConfig};
use chaostap::tfa::{cwt, scalogram_row_means, FrequencyGrid, WaveletParams};
use chaostap::TimeTrace;
use proptest::prelude::*;

fn carrier() -> (LaserParams, SimConfig, TimeTrace) {
    let p = LaserParams::default();
    let cfg = SimConfig { record_stride: 5, ..SimConfig::for_params(&p) };
    let tr = integrate_laser(&p, &cfg, &DriveWaveform::Bias).unwrap();
    (p, cfg, tr)
}

fn uniform(n: usize, seed: u64) -> Vec<f64> {
    let mut s = seed | 1;
    (0..n)
        .map(|_| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect()
}

#[test]
fn snr_ignores_reference_phase() {
    let (_, _, tr) = carrier();
    let m = MessageSpec::new(Scheme::Cma, 1.0, 0.05).unwrap();
    let hidden = encrypt_cma(&tr, &m).unwrap();
    let filtered = apply_bpf(&design_bpf(&BpfSpec::centered(1.0), hidden.sample_rate()).unwrap(), &hidden).unwrap();
    let base = snr(&filtered, &m).unwrap();
    for phase in [0.4, 1.9, -2.5] {
        assert_eq!(snr(&filtered, &MessageSpec { phase, ..m }).unwrap(), base);
    }
}

#[test]
fn snr_of_equal_power_tone_and_residual_is_zero_db() {
    // Tone plus band-limited residual of the same mean power. The span holds
    // many residual correlation times so its projection on the tone is small.
    let n = 1_000_000;
    let noise = uniform(n, 7);
    let spec = BpfSpec::centered(1.0);
    let f = design_bpf(&spec, 200.0).unwrap();
    let shaped = f.filter(&noise.iter().map(|v| v - 0.5).collect::<Vec<_>>());
    let skip = 5000;
    let residual: Vec<f64> = {
        let ms: f64 = shaped[skip..].iter().map(|v| v * v).sum::<f64>() / (n - skip) as f64;
        // Target power 0.5, the power of a unit sinusoid.
        shaped.iter().map(|v| v * (0.5 / ms).sqrt()).collect()
    };
    let sig: Vec<f64> = (0..n).map(|k| (2.0 * PI * 1.0 * k as f64 * 5e-3).sin() + residual[k]).collect();
    let tr = TimeTrace::signed(sig, 5.0, 0.0).unwrap();
    let db = chaostap::dsp::snr_at(&tr, skip, 1.0).unwrap();
    assert!(db.abs() < 0.5, "{db}");
}

#[test]
fn detection_decisions_ignore_trace_scale() {
    let (p, cfg, _) = carrier();
    let m = MessageSpec::new(Scheme::Cmo, 1.0, 0.04).unwrap();
    let tr = encrypt_cmo(&p, &cfg, &m).unwrap();
    let attack = AttackConfig::default();
    let base = detect(&tr, &attack, 0.02).unwrap();
    for alpha in [0.1, 3.0, 1000.0] {
        let r = detect(&tr.scaled(alpha), &attack, 0.02).unwrap();
        assert_eq!(r.detected, base.detected, "alpha {alpha}");
        assert_eq!(r.est_freq, base.est_freq, "alpha {alpha}");
    }
    // Powers of two scale every intermediate exactly, psl included.
    for alpha in [0.125, 4.0, 1024.0] {
        let r = detect(&tr.scaled(alpha), &attack, 0.02).unwrap();
        assert_eq!(r.psl, base.psl, "alpha {alpha}");
        assert_eq!(r.est_freq, base.est_freq, "alpha {alpha}");
    }
}

#[test]
fn white_noise_threshold_is_about_the_margin() {
    let tr = TimeTrace::new(uniform(400_000, 11), 5.0, 0.0).unwrap();
    let cfg = AttackConfig::default();
    let th = calibrate_threshold(&tr, &cfg).unwrap();
    // Sampling noise of the row means only; a detectable tone sits near 0.1 dB.
    assert!(th >= cfg.margin_db && th < cfg.margin_db + 0.05, "{th}");
}

#[test]
fn disjoint_carrier_runs_calibrate_alike() {
    let p = LaserParams::default();
    let cfg = SimConfig { duration_ns: 240.0, record_stride: 5, ..SimConfig::for_params(&p) };
    let tr = integrate_laser(&p, &cfg, &DriveWaveform::Bias).unwrap();
    let half = tr.len() / 2;
    let a = tr.with_samples(tr.samples()[..half].to_vec()).unwrap();
    let b = tr.with_samples(tr.samples()[half..].to_vec()).unwrap();
    let attack = AttackConfig::default();
    let (ta, tb) = (calibrate_threshold(&a, &attack).unwrap(), calibrate_threshold(&b, &attack).unwrap());
    assert!(ta < 0.02 && tb < 0.02, "{ta} {tb}");
    assert!((ta - tb).abs() < 0.01);
}

#[test]
fn carrier_is_not_flagged_and_cmo_tone_is() {
    let (p, cfg, tr) = carrier();
    let attack = AttackConfig::default();
    let th = calibrate_threshold(&tr, &attack).unwrap();
    let m = MessageSpec::new(Scheme::Cmo, 1.0, 0.04).unwrap();
    let hidden = encrypt_cmo(&p, &cfg, &m).unwrap();
    let report = detect(&hidden, &attack, th).unwrap();
    assert!(report.detected);
    let out = extract(&hidden, &report, &attack, Some(&m)).unwrap();
    assert_eq!(Some(out.center_used), report.est_freq);
    assert!(out.snr_true.unwrap() > 0.0);
    let at_truth = extract_at(&hidden, 1.0, &attack, Some(&m)).unwrap();
    assert_eq!(at_truth.snr_detected, at_truth.snr_true.unwrap());
}

#[test]
fn cmo_without_depth_is_the_carrier() {
    let (p, cfg, tr) = carrier();
    let m = MessageSpec::new(Scheme::Cmo, 2.0, 0.0).unwrap();
    assert_eq!(encrypt_cmo(&p, &cfg, &m).unwrap(), tr);
}

#[test]
fn carrier_spectrum_is_broadband() {
    let p = LaserParams::default();
    let tr = integrate_laser(&p, &SimConfig::for_params(&p), &DriveWaveform::Bias).unwrap();
    let ps = power_spectrum(&tr).unwrap();
    // The DC line carries the mean; every other bin is a small share.
    let total = ps.fluctuation_power();
    let biggest = ps.psd[1..].iter().cloned().fold(0.0, f64::max) * ps.bin_width;
    assert!(biggest < 0.1 * total, "largest bin holds {:.3} of the power", biggest / total);
}

/// Where the row mean of a unit tone at `f0` peaks. The magnitude goes as
/// `√a · exp(-π² Q (1 - f0/f)²)` with `Q = fb·fc²`, and `√a` pulls the
/// maximum below `f0`.
fn tone_peak(f0: f64, w: &WaveletParams) -> f64 {
    let q = w.fb * w.fc * w.fc;
    2.0 * f0 / (1.0 + (1.0 + 1.0 / (PI * PI * q)).sqrt())
}

#[test]
fn tone_row_mean_peaks_where_predicted() {
    let dt_ps = 1.0;
    let x: Vec<f64> = (0..40_000).map(|k| (2.0 * PI * 2.0 * k as f64 * dt_ps * 1e-3).sin()).collect();
    let tr = TimeTrace::signed(x.clone(), dt_ps, 0.0).unwrap();
    let grid = FrequencyGrid::default();
    for w in [WaveletParams::default(), WaveletParams::new(2.0, 1.0).unwrap()] {
        let means = scalogram_row_means(&tr, &grid, &w).unwrap();
        let top = (0..means.len()).max_by(|&a, &b| means[a].total_cmp(&means[b])).unwrap();
        let expect = tone_peak(2.0, &w);
        let nearest = (0..means.len())
            .min_by(|&a, &b| (grid.freqs()[a] - expect).abs().total_cmp(&(grid.freqs()[b] - expect).abs()))
            .unwrap();
        assert_eq!(top, nearest, "{w:?}: peak at {} GHz, predicted {expect}", grid.freqs()[top]);
    }
    // A long envelope lands on the tone's own bin.
    assert!((tone_peak(2.0, &WaveletParams::new(2.0, 1.0).unwrap()) - 2.0).abs() < 0.025);

    let w = WaveletParams::default();
    // One coefficient against the defining sum.
    let sc = cwt(&tr, &FrequencyGrid::uniform(1.9, 0.05, 5).unwrap(), &w).unwrap();
    let a = w.scale(2.0, tr.dt_ns());
    let k = 20_000;
    let (mut re, mut im) = (0.0, 0.0);
    for (n, &v) in x.iter().enumerate() {
        let u = (n as f64 - k as f64) / a;
        let env = (-u * u / w.fb).exp() / ((PI * w.fb).sqrt() * a.sqrt());
        re += v * env * (2.0 * PI * w.fc * u).cos();
        im -= v * env * (2.0 * PI * w.fc * u).sin();
    }
    let direct = re.hypot(im);
    assert!((sc.get(2, k) - direct).abs() < 1e-6 * direct, "{} vs {direct}", sc.get(2, k));
}

#[test]
fn shifting_the_record_barely_moves_psl() {
    let (_, _, tr) = carrier();
    let attack = AttackConfig::default();
    let hidden = encrypt_cma(&tr, &MessageSpec::new(Scheme::Cma, 1.0, 0.05).unwrap()).unwrap();
    for t in [&tr, &hidden] {
        let base = detect(t, &attack, 0.0).unwrap().psl;
        let mut s = t.samples().to_vec();
        s.rotate_left(t.len() / 100);
        let moved = detect(&t.with_samples(s).unwrap(), &attack, 0.0).unwrap().psl;
        assert!((moved - base).abs() < 0.1, "{base} -> {moved}");
    }
}

#[test]
fn cma_at_four_ghz_goes_unseen() {
    let (_, _, tr) = carrier();
    let attack = AttackConfig::default();
    let th = calibrate_threshold(&tr, &attack).unwrap();
    let hidden = encrypt_cma(&tr, &MessageSpec::new(Scheme::Cma, 4.0, 0.05).unwrap()).unwrap();
    assert!(!detect(&hidden, &attack, th).unwrap().detected);
}

#[test]
fn cma_one_ghz_extracts_cleaner_than_two() {
    // Long record: on 40 ns the fit's own scatter is comparable to the gap.
    let p = LaserParams::default();
    let cfg = SimConfig { duration_ns: 240.0, record_stride: 5, ..SimConfig::for_params(&p) };
    let tr = integrate_laser(&p, &cfg, &DriveWaveform::Bias).unwrap();
    let attack = AttackConfig::default();
    let snr_true = |f: f64| {
        let m = MessageSpec::new(Scheme::Cma, f, 0.05).unwrap();
        let hidden = encrypt_cma(&tr, &m).unwrap();
        extract_at(&hidden, f, &attack, Some(&m)).unwrap().snr_true.unwrap()
    };
    let (one, two) = (snr_true(1.0), snr_true(2.0));
    assert!(one > two, "{one} vs {two}");
}

prop_compose! {
    fn positive_trace()(n in 1usize..400, seed in any::<u64>(), dt in 0.5f64..10.0, t0 in -5.0f64..5.0)
        -> TimeTrace {
        TimeTrace::new(uniform(n, seed).iter().map(|v| 3.0 * v).collect(), dt, t0).unwrap()
    }
}

proptest! {
    #[test]
    fn cma_keeps_timing_and_sign(tr in positive_trace(), f in 0.1f64..10.0, md in 0.0f64..0.999) {
        let out = encrypt_cma(&tr, &MessageSpec::new(Scheme::Cma, f, md).unwrap()).unwrap();
        prop_assert_eq!(out.len(), tr.len());
        prop_assert_eq!(out.dt_ps(), tr.dt_ps());
        prop_assert_eq!(out.t0_ns(), tr.t0_ns());
        prop_assert!(out.samples().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn cma_commutes_with_scaling(tr in positive_trace(), f in 0.1f64..10.0, md in 0.0f64..0.999, k in -30i32..30) {
        let m = MessageSpec::new(Scheme::Cma, f, md).unwrap();
        let alpha = 2f64.powi(k);
        let a = encrypt_cma(&tr.scaled(alpha), &m).unwrap();
        let b = encrypt_cma(&tr, &m).unwrap().scaled(alpha);
        prop_assert_eq!(a, b);
    }
}
