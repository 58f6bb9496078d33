//! Acceptance checks, one PASS/FAIL line per criterion.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode, Output};
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use uaswave::channel::{doppler_max, kmh_to_mps, rms_delay_spread, PowerDelayProfile};
use uaswave::forecast::*;
use uaswave::ofdm::*;
use uaswave::optimizer::*;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        ("1  rms delay spread", c1_delay_spread),
        ("2  logistic model", c2_logistic),
        ("3  density table", c3_density),
        ("4  required spectral efficiency", c4_required_se),
        ("5  analytic vs Monte Carlo SINR", c5_sinr_cross_validation),
        ("6a 5 GHz mapping nondecreasing", c6a_monotone),
        ("6b 1 GHz spacing <= 5 GHz spacing", c6b_carrier_order),
        ("6c optimum equals exhaustive search", c6c_exhaustive),
        ("6d reference comparison report", c6d_report),
        ("7  numerology rules", c7_numerology),
        ("8  deterministic CLI output", c8_determinism),
        ("9a BER vs Q oracle", c9a_ber),
        ("9b bit loading vs brute force", c9b_bit_load),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} ({secs:.1} s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} ({secs:.1} s)");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn velocities() -> Vec<f64> {
    (0..9).map(|i| 40.0 + 20.0 * f64::from(i)).collect()
}

fn scenario_at(carrier_hz: f64) -> LinkScenario {
    LinkScenario {
        carrier_hz,
        ..LinkScenario::default()
    }
}

fn c1_delay_spread() -> Check {
    let sigma = rms_delay_spread(&PowerDelayProfile::atg_prototype());
    ensure(
        (sigma - 87.5).abs() <= 1.0,
        format!("{sigma:.3} ns, target 87.5 +- 1"),
    )
}

fn c2_logistic() -> Check {
    let m = GrowthModel::commercial();
    let mid = logistic_eval(&m, f64::from(m.base_year) + m.p3);
    let half = (m.p1 + m.p2) / 2.0;
    if (mid - half).abs() > 4.0 * f64::EPSILON * half {
        return Err(format!("f(p3) = {mid}, expected {half}"));
    }
    let pts: Vec<(f64, f64)> = (2015..=2035)
        .map(|y| (f64::from(y), logistic_eval(&m, f64::from(y))))
        .collect();
    if !pts.windows(2).all(|w| w[1].1 > w[0].1) {
        return Err("2015-2035 sequence not strictly increasing".into());
    }
    let fit = fit_logistic(&pts, 2015).map_err(|e| e.to_string())?.model;
    let worst = [
        (fit.p1, m.p1),
        (fit.p2, m.p2),
        (fit.p3, m.p3),
        (fit.p4, m.p4),
    ]
    .iter()
    .map(|(a, b)| (a / b - 1.0).abs())
    .fold(0.0, f64::max);
    ensure(worst < 0.01, format!("worst parameter error {:.2e}", worst))
}

fn c3_density() -> Check {
    let d = DensityScenario::default()
        .densities()
        .map_err(|e| e.to_string())?;
    let expected = [7.33, 9.05, 0.77];
    let worst = d
        .iter()
        .zip(expected)
        .map(|(g, e)| (g / e - 1.0).abs())
        .fold(0.0, f64::max);
    ensure(
        worst <= 0.02,
        format!("{d:.4?}, worst deviation {:.2}%", worst * 100.0),
    )
}

fn c4_required_se() -> Check {
    let se = required_spectral_efficiency(69.5e6, 34e6, 0.75).map_err(|e| e.to_string())?;
    ensure((se - 1.53).abs() <= 0.01, format!("{se:.4} bps/Hz"))
}

fn c5_sinr_cross_validation() -> Check {
    let pdp = PowerDelayProfile::atg_prototype();
    let mut worst = (0.0f64, 0.0, 0.0, 0.0);
    let mut points = 0;
    for fc in [1e9, 5e9] {
        let s = scenario_at(fc);
        for cand in s.candidates().map_err(|e| e.to_string())? {
            for v in velocities() {
                let f_d = doppler_max(kmh_to_mps(v), fc);
                let analytic =
                    average_sinr(ici_power_analytic(f_d, cand.delta_f), s.snr_db, cand.n_used)
                        .map_err(|e| e.to_string())?;
                let mc = sinr_monte_carlo(&pdp, f_d, &cand, s.snr_db, 2000, 1);
                let gap = (analytic.mean_sinr_db - mc.mean_sinr_db).abs();
                if gap > worst.0 {
                    worst = (gap, fc, cand.delta_f, v);
                }
                points += 1;
            }
        }
    }
    ensure(
        worst.0 <= 0.5,
        format!(
            "{points} points, worst gap {:.3} dB at fc={} GHz, df={} kHz, v={} km/h",
            worst.0,
            worst.1 / 1e9,
            worst.2 / 1e3,
            worst.3
        ),
    )
}

fn mapping(carrier_hz: f64, grid: &[f64]) -> Result<Vec<f64>, String> {
    let m = velocity_mapping(
        &scenario_at(carrier_hz),
        &PowerDelayProfile::atg_prototype(),
        grid,
        &SinrSource::Analytic,
    )
    .map_err(|e| e.to_string())?;
    m.entries
        .iter()
        .map(|e| {
            e.optimal_spacing()
                .ok_or_else(|| format!("no feasible spacing at {} km/h", e.velocity_kmh))
        })
        .collect()
}

fn fine_grid() -> Vec<f64> {
    (0..=40).map(|i| 5.0 * f64::from(i)).collect()
}

fn c6a_monotone() -> Check {
    let sp = mapping(5e9, &fine_grid())?;
    ensure(
        sp.windows(2).all(|w| w[0] <= w[1]),
        format!("{} velocities, spacings {:?} kHz", sp.len(), dedup_khz(&sp)),
    )
}

fn dedup_khz(sp: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = sp.iter().map(|x| x / 1e3).collect();
    v.dedup();
    v
}

fn c6b_carrier_order() -> Check {
    let grid = fine_grid();
    let low = mapping(1e9, &grid)?;
    let high = mapping(5e9, &grid)?;
    let bad: Vec<f64> = grid
        .iter()
        .zip(low.iter().zip(&high))
        .filter(|(_, (l, h))| l > h)
        .map(|(v, _)| *v)
        .collect();
    ensure(
        bad.is_empty(),
        format!("{} velocities compared, violations at {bad:?}", grid.len()),
    )
}

fn c6c_exhaustive() -> Check {
    let pdp = PowerDelayProfile::atg_prototype();
    let mut cases = 0;
    for fc in [1e9, 2.4e9, 5e9] {
        for v in fine_grid() {
            let s = scenario_at(fc);
            let results = evaluate_candidates(&s, &pdp, v, &SinrSource::Analytic)
                .map_err(|e| e.to_string())?;
            // first maximum in ascending-spacing order wins ties
            let mut order: Vec<&ObjectiveResult> = results.iter().filter(|r| r.feasible).collect();
            order.sort_by(|a, b| a.delta_f.total_cmp(&b.delta_f));
            let mut best: Option<&ObjectiveResult> = None;
            for r in order {
                if best.is_none_or(|b| r.spectral_efficiency > b.spectral_efficiency) {
                    best = Some(r);
                }
            }
            let got = optimize_subcarrier_spacing(&s, &pdp, v, &SinrSource::Analytic).ok();
            if got.map(|r| r.delta_f) != best.map(|r| r.delta_f) {
                return Err(format!("mismatch at fc={fc}, v={v}: {got:?} vs {best:?}"));
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} cases"))
}

fn run_cli(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uaswave"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawn uaswave")
}

fn c6d_report() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = run_cli(&["optimize"], dir.path());
    if !out.status.success() {
        return Err(format!(
            "exit {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    let report =
        fs::read_to_string(dir.path().join("optimal_spacing.csv")).map_err(|e| e.to_string())?;
    let stderr = String::from_utf8_lossy(&out.stderr);
    let mut rows = 0;
    let mut deviations = Vec::new();
    for line in report.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        rows += 1;
        let (optimal, reference, status) = (f[2], f[4], f[5]);
        let expected = if reference.is_empty() {
            "no_reference"
        } else if optimal.parse::<f64>() == reference.parse::<f64>() {
            "match"
        } else {
            "deviation"
        };
        if status != expected {
            return Err(format!(
                "row {line:?} labelled {status}, expected {expected}"
            ));
        }
        if status == "deviation" {
            if !stderr.contains(&format!("deviation: {} km/h", f[0])) {
                return Err(format!("deviation at {} km/h not flagged on stderr", f[0]));
            }
            deviations.push(f[0].to_string());
        }
    }
    ensure(
        rows == 9,
        format!("{rows} rows, deviations flagged at {deviations:?} km/h"),
    )
}

fn c7_numerology() -> Check {
    let bw_alpha = 4.5e6;
    // hand-computed: floor(4.5 MHz / df) and its closest power of two
    let table = [
        (3e3, 1024, 1024),
        (6e3, 512, 512),
        (9e3, 512, 500),
        (18e3, 256, 250),
        (35e3, 128, 128),
        (45e3, 128, 100),
    ];
    for (df, n_fft, n_used) in table {
        let c = WaveformCandidate::new(df, bw_alpha, 2e-6).map_err(|e| e.to_string())?;
        if c.n_fft != n_fft || c.n_used != n_used {
            return Err(format!(
                "{df} Hz -> ({}, {}), expected ({n_fft}, {n_used})",
                c.n_fft, c.n_used
            ));
        }
        if c.n_used as f64 * df > bw_alpha {
            return Err(format!("{df} Hz occupies {} Hz", c.n_used as f64 * df));
        }
    }
    Ok("six candidates".into())
}

fn c8_determinism() -> Check {
    let cfg_dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = cfg_dir.path().join("run.toml");
    fs::write(
        &cfg,
        "[sweep]\nvelocities_kmh = [60.0, 180.0]\n[monte_carlo]\nrealizations = 40\nseed = 11\n",
    )
    .map_err(|e| e.to_string())?;
    let cfg = cfg.to_str().unwrap();
    let runs: [&[&str]; 6] = [
        &["sweep-sinr", "--config", cfg],
        &["sweep-sinr", "--config", cfg, "--mc"],
        &["optimize", "--config", cfg, "--mc", "--seed", "5"],
        &["forecast", "--config", cfg],
        &["density", "--config", cfg],
        &["bandwidth", "--config", cfg],
    ];
    let mut files = 0;
    for args in runs {
        let a = tempfile::tempdir().map_err(|e| e.to_string())?;
        let b = tempfile::tempdir().map_err(|e| e.to_string())?;
        for d in [&a, &b] {
            let out = run_cli(args, d.path());
            if !out.status.success() {
                return Err(format!("{args:?} exited {:?}", out.status.code()));
            }
        }
        let mut names: Vec<_> = fs::read_dir(a.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        for name in names {
            if fs::read(a.path().join(&name)).ok() != fs::read(b.path().join(&name)).ok() {
                return Err(format!("{args:?}: {name:?} differs between runs"));
            }
            files += 1;
        }
    }
    Ok(format!("{files} files byte-identical across reruns"))
}

/// Q(x) by composite Simpson integration of the normal density.
fn q_oracle(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - q_oracle(-x);
    }
    let (a, b, n) = (x, x + 14.0, 200_000);
    let h = (b - a) / n as f64;
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = pdf(a) + pdf(b);
    for i in 1..n {
        s += pdf(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn ber_oracle(bits: u8, sinr: f64) -> f64 {
    if bits == 1 {
        return q_oracle((2.0 * sinr).sqrt());
    }
    let m = 2f64.powi(i32::from(bits));
    4.0 / f64::from(bits) * (1.0 - 1.0 / m.sqrt()) * q_oracle((3.0 * sinr / (m - 1.0)).sqrt())
}

fn c9a_ber() -> Check {
    let mut worst = 0.0f64;
    let mut n = 0;
    for bits in [1u8, 2, 4, 6, 8] {
        for sinr_db in [0.0, 8.0, 16.0, 24.0] {
            let s = 10f64.powf(sinr_db / 10.0);
            let got = ber_mqam_awgn(bits, s).map_err(|e| e.to_string())?;
            let want = ber_oracle(bits, s);
            worst = worst.max((got / want - 1.0).abs());
            n += 1;
        }
    }
    ensure(
        n == 20 && worst <= 0.01,
        format!("{n} points, worst relative error {worst:.2e}"),
    )
}

fn c9b_bit_load() -> Check {
    let mut rng = StdRng::seed_from_u64(2024);
    let allowed: Vec<u8> = (0..=8).collect();
    for i in 0..1000 {
        let sinr = 10f64.powf(rng.gen_range(-1.0..4.0));
        let gap = rng.gen_range(1.0..12.0);
        let subset: Vec<u8> = if i % 2 == 0 {
            allowed.clone()
        } else {
            allowed
                .iter()
                .copied()
                .filter(|_| rng.gen_bool(0.6))
                .collect()
        };
        let mut best = 0u8;
        for &b in &subset {
            if f64::from(b) <= (1.0 + sinr / gap).log2() && b > best {
                best = b;
            }
        }
        let got = qam_bit_load(sinr, gap, &subset);
        if got != best {
            return Err(format!(
                "sinr={sinr}, gap={gap}, allowed={subset:?}: {got} vs {best}"
            ));
        }
    }
    Ok("1000 random pairs".into())
}
