//! Student-t upper quantiles by numerical integration.
//!
//! With `t = sqrt(v) tan(theta)` the t density becomes proportional to
//! `cos(theta)^(v - 1)`, so the upper tail mass beyond `t` is
//! `int_{atan(t / sqrt v)}^{pi/2} cos^(v-1) / (2 int_0^{pi/2} cos^(v-1))`.

use std::f64::consts::FRAC_PI_2;

const PANELS: usize = 40_000;

fn simpson(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / PANELS as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..PANELS {
        let v = f(a + i as f64 * h);
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even)
}

/// Probability that a t variable with `dof` degrees of freedom exceeds `t`.
pub fn upper_tail(t: f64, dof: u32) -> f64 {
    assert!(dof >= 1 && t >= 0.0);
    let power = dof as i32 - 1;
    let f = |theta: f64| theta.cos().powi(power);
    let start = (t / (dof as f64).sqrt()).atan();
    0.5 * simpson(start, FRAC_PI_2, f) / simpson(0.0, FRAC_PI_2, f)
}

/// `t` with `P(T <= t) = p`, for `p` in `(0.5, 1)`, by bisection on the tail.
pub fn quantile(p: f64, dof: u32) -> f64 {
    assert!(p > 0.5 && p < 1.0);
    let target = 1.0 - p;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while upper_tail(hi, dof) > target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if upper_tail(mid, dof) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Two-sided prediction interval `mean +- t * s * sqrt(1 + 1/n)` with the
/// sample standard deviation `s`.
pub fn prediction_interval(values: &[f64], p: f64) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        return (mean, mean);
    }
    let half = quantile(p, values.len() as u32 - 1) * var.sqrt() * (1.0 + 1.0 / n).sqrt();
    (mean - half, mean + half)
}
