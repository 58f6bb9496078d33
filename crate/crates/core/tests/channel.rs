mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use rustfft::FftPlanner;
use uaswave::channel::*;

fn random_profile() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..10).prop_flat_map(|n| {
        (
            prop::collection::vec(1.0f64..200.0, n),
            prop::collection::vec(-30.0f64..0.0, n),
        )
            .prop_map(|(gaps, mut powers)| {
                let mut d = 0.0;
                let delays: Vec<f64> = gaps
                    .iter()
                    .enumerate()
                    .map(|(i, g)| {
                        if i > 0 {
                            d += g;
                        }
                        d
                    })
                    .collect();
                powers[0] = 0.0;
                (delays, powers)
            })
    })
}

proptest! {
    #[test]
    fn delay_spread_ignores_power_offset((delays, powers) in random_profile(), offset in -40.0f64..40.0) {
        let base = PowerDelayProfile::new(&delays, &powers).unwrap();
        let shifted: Vec<f64> = powers.iter().map(|p| p + offset).collect();
        let again = PowerDelayProfile::normalized(&delays, &shifted).unwrap();
        let (a, b) = (rms_delay_spread(&base), rms_delay_spread(&again));
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn delay_spread_ignores_time_shift((delays, powers) in random_profile(), shift in 0.0f64..5000.0) {
        let base = PowerDelayProfile::new(&delays, &powers).unwrap();
        let late: Vec<f64> = delays.iter().map(|d| d + shift).collect();
        let again = PowerDelayProfile::normalized(&late, &powers).unwrap();
        prop_assert!((rms_delay_spread(&base) - rms_delay_spread(&again)).abs() < 1e-6);
        prop_assert!((max_excess_delay(&base) - max_excess_delay(&again)).abs() < 1e-9);
    }

    #[test]
    fn corr90_is_tenth_of_corr50(sigma in 1.0f64..5000.0) {
        let a = coherence_bandwidth(sigma, CoherenceLevel::Corr50);
        let b = coherence_bandwidth(sigma, CoherenceLevel::Corr90);
        prop_assert!((b - a / 10.0).abs() <= 1e-12 * a);
    }

    #[test]
    fn coherence_estimates_shrink(sigma in 1.0f64..5000.0, fd in 1.0f64..5000.0) {
        prop_assert!(coherence_bandwidth(sigma * 1.5, CoherenceLevel::Corr50) < coherence_bandwidth(sigma, CoherenceLevel::Corr50));
        prop_assert!(coherence_time(fd * 1.5).unwrap() < coherence_time(fd).unwrap());
    }
}

#[test]
fn per_tap_variance_matches_profile() {
    let pdp = PowerDelayProfile::atg_prototype();
    let r = generate_tap_processes(&pdp, DopplerSpectrum::jakes(100.0), 1_000_000, 1e-4, 11);
    for (g, p) in r.gains.iter().zip(pdp.normalized_linear_powers()) {
        let var = g.iter().map(|z| z.norm_sqr()).sum::<f64>() / g.len() as f64;
        assert!((var / p - 1.0).abs() < 0.05, "variance {var} vs power {p}");
    }
}

fn autocorrelation(g: &[Complex64], lag: usize) -> Complex64 {
    let n = g.len() - lag;
    g[lag..]
        .iter()
        .zip(&g[..n])
        .map(|(a, b)| a * b.conj())
        .sum::<Complex64>()
        / n as f64
}

#[test]
fn autocorrelation_follows_bessel() {
    let pdp = PowerDelayProfile::atg_prototype();
    let dt = 1e-4;
    let r = generate_tap_processes(&pdp, DopplerSpectrum::jakes(100.0), 400_000, dt, 5);
    let expected = common::j0_oracle(2.0 * std::f64::consts::PI * 100.0 * 1e-3);
    assert!((expected - 0.9037).abs() < 1e-4);
    let lag = (1e-3 / dt).round() as usize;
    let mut total0 = 0.0;
    for g in &r.gains {
        let r0 = autocorrelation(g, 0).re;
        let r1 = autocorrelation(g, lag).re / r0;
        assert!((r1 - expected).abs() < 0.02, "rho = {r1}");
        total0 += r0;
    }
    // lag 0 carries the full (unit) profile power
    assert!((total0 - 1.0).abs() < 0.05, "{total0}");
}

#[test]
fn spectrum_stays_inside_doppler_band() {
    let pdp = PowerDelayProfile::new(&[0.0], &[0.0]).unwrap();
    let f_d = 100.0;
    let dt = 1e-4; // f_d dt = 0.01
    let n = 1 << 16;
    let r = generate_tap_processes(&pdp, DopplerSpectrum::jakes(f_d), n, dt, 2);
    let mut buf: Vec<Complex64> = r.gains[0]
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos();
            z * w
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let df = 1.0 / (n as f64 * dt);
    let guard = 4.0 * df;
    let (mut inside, mut outside) = (0.0, 0.0);
    for (k, z) in buf.iter().enumerate() {
        let f = if k < n / 2 {
            k as f64 * df
        } else {
            (k as f64 - n as f64) * df
        };
        if f.abs() <= f_d + guard {
            inside += z.norm_sqr();
        } else {
            outside += z.norm_sqr();
        }
    }
    assert!(
        outside / (inside + outside) < 0.01,
        "{}",
        outside / (inside + outside)
    );
}

#[test]
fn seeds_reproduce_and_differ() {
    let pdp = PowerDelayProfile::atg_prototype();
    let d = DopplerSpectrum::jakes(300.0);
    let a = generate_tap_processes(&pdp, d, 5000, 1e-5, 42);
    let b = generate_tap_processes(&pdp, d, 5000, 1e-5, 42);
    let c = generate_tap_processes(&pdp, d, 5000, 1e-5, 43);
    assert_eq!(a, b);
    let bits = |r: &TapProcessRealization| -> Vec<u64> {
        r.gains
            .iter()
            .flatten()
            .flat_map(|z| [z.re.to_bits(), z.im.to_bits()])
            .collect()
    };
    assert_eq!(bits(&a), bits(&b));
    assert_ne!(a.gains, c.gains);
}

#[test]
fn static_taps_are_constant() {
    let pdp = PowerDelayProfile::new(&[0.0, 100.0], &[0.0, -3.0]).unwrap();
    let r = generate_tap_processes(&pdp, DopplerSpectrum::jakes(0.0), 16, 1e-3, 9);
    for g in &r.gains {
        assert!(
            g.iter().all(|z| (z - g[0]).norm() < 1e-12),
            "f_d = 0 gives a constant gain"
        );
    }
}

#[test]
fn spread_survives_extreme_delays() {
    let pdp = PowerDelayProfile::new(&[0.0, 1e200, 2e200], &[0.0, 0.0, 0.0]).unwrap();
    let sigma = rms_delay_spread(&pdp);
    let expected = 1e200 * (2.0f64 / 3.0).sqrt();
    assert!((sigma / expected - 1.0).abs() < 1e-12, "{sigma}");
}
