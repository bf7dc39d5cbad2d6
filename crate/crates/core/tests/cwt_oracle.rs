//! The fast CWT against a direct evaluation of the defining sum.

use std::f64::consts::PI;

use chaostap::tfa::{cwt, msr, FrequencyGrid, WaveletParams};
use chaostap::TimeTrace;
use proptest::prelude::*;

/// `a^(-1/2) Σ_n x[n] ψ*((n-k)/a)` with no truncation.
fn direct(x: &[f64], freq: f64, dt_ns: f64, fb: f64, fc: f64) -> Vec<f64> {
    let a = fc / (freq * dt_ns);
    let norm = 1.0 / ((PI * fb).sqrt() * a.sqrt());
    (0..x.len())
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (n, &v) in x.iter().enumerate() {
                let u = (n as f64 - k as f64) / a;
                let env = norm * (-u * u / fb).exp();
                let arg = 2.0 * PI * fc * u;
                re += v * env * arg.cos();
                im -= v * env * arg.sin();
            }
            (re * re + im * im).sqrt()
        })
        .collect()
}

prop_compose! {
    fn case()(
        n in 16usize..=256,
        dt_ps in 20.0f64..200.0,
        fb in 0.2f64..4.0,
        fc in 0.5f64..2.0,
        seed in any::<u64>(),
    ) -> (Vec<f64>, f64, f64, f64) {
        let mut s = seed | 1;
        let x = (0..n).map(|_| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64
        }).collect();
        (x, dt_ps, fb, fc)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn fast_path_matches_quadrature((x, dt_ps, fb, fc) in case()) {
        let tr = TimeTrace::new(x.clone(), dt_ps, 0.0).unwrap();
        let nyq = tr.nyquist_ghz();
        let grid = FrequencyGrid::uniform(0.05 * nyq, 0.15 * nyq, 6).unwrap();
        let w = WaveletParams::new(fb, fc).unwrap();
        let sc = cwt(&tr, &grid, &w).unwrap();
        let mut worst = 0.0f64;
        for (i, &f) in grid.freqs().iter().enumerate() {
            let reference = direct(&x, f, tr.dt_ns(), fb, fc);
            for (k, &r) in reference.iter().enumerate() {
                let err = (sc.get(i, k) - r).abs() / r.max(f64::MIN_POSITIVE);
                worst = worst.max(err);
            }
        }
        prop_assert!(worst < 1e-9, "max relative error {worst}");
    }

    #[test]
    fn msr_ignores_positive_scaling((x, dt_ps, fb, fc) in case(), k in -20i32..20) {
        let tr = TimeTrace::new(x, dt_ps, 0.0).unwrap();
        let nyq = tr.nyquist_ghz();
        let grid = FrequencyGrid::uniform(0.05 * nyq, 0.15 * nyq, 6).unwrap();
        let w = WaveletParams::new(fb, fc).unwrap();
        // Powers of two scale every intermediate exactly.
        let a = msr(&cwt(&tr, &grid, &w).unwrap()).unwrap();
        let b = msr(&cwt(&tr.scaled(2f64.powi(k)), &grid, &w).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn psl_is_never_negative((x, dt_ps, fb, fc) in case()) {
        let tr = TimeTrace::new(x, dt_ps, 0.0).unwrap();
        let nyq = tr.nyquist_ghz();
        let grid = FrequencyGrid::uniform(0.05 * nyq, 0.1 * nyq, 9).unwrap();
        let curve = msr(&cwt(&tr, &grid, &WaveletParams::new(fb, fc).unwrap()).unwrap()).unwrap();
        prop_assert!(curve.psl >= 0.0);
        prop_assert!(curve.eta.iter().all(|&e| e > 0.0 && e < 1.0));
    }
}
