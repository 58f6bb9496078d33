//! Independent numerical oracles. None of these call into the library's
//! quadrature or special-function code.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Q(x) by composite Simpson integration of the Gaussian density over
/// [x, x + 14], with enough panels for ~1e-12 relative accuracy on the tails
/// used in the tests.
pub fn q_oracle(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - q_oracle(-x);
    }
    let a = x;
    let b = x + 14.0;
    let n = 200_000;
    let h = (b - a) / n as f64;
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * PI).sqrt();
    let mut s = pdf(a) + pdf(b);
    for i in 1..n {
        let t = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * pdf(t);
    }
    s * h / 3.0
}

/// J0(x) = (1/pi) * integral_0^pi cos(x sin t) dt, composite midpoint rule.
pub fn j0_oracle(x: f64) -> f64 {
    let n = 100_000;
    let h = PI / n as f64;
    (0..n)
        .map(|i| (x * ((i as f64 + 0.5) * h).sin()).cos())
        .sum::<f64>()
        * h
        / PI
}

/// Signal fraction for a Jakes spectrum through the sinc^2 window,
/// midpoint rule over the arrival angle.
pub fn signal_fraction_oracle(f_d: f64, delta_f: f64) -> f64 {
    let n = 400_000;
    let h = PI / n as f64;
    let r = f_d / delta_f;
    (0..n)
        .map(|i| {
            let x = PI * r * ((i as f64 + 0.5) * h).cos();
            if x == 0.0 {
                1.0
            } else {
                (x.sin() / x).powi(2)
            }
        })
        .sum::<f64>()
        * h
        / PI
}
