//! Bessel functions of integer order from their integral representations.

use super::quad::integrate_adaptive;
use std::f64::consts::PI;

/// J_m(x) via the Bessel integral; the integrand is periodic so the
/// trapezoid rule converges geometrically.
pub fn bessel_j(m: i32, x: f64) -> f64 {
    let n = 64 + 2 * (x.abs() as usize + m.unsigned_abs() as usize);
    let h = PI / n as f64;
    let mut s = 0.0;
    for j in 0..=n {
        let t = j as f64 * h;
        let w = if j == 0 || j == n { 0.5 } else { 1.0 };
        s += w * (m as f64 * t - x * t.sin()).cos();
    }
    s * h / PI
}

/// Y_m(x) for x > 0 (Schlaefli representation).
pub fn bessel_y(m: i32, x: f64) -> f64 {
    assert!(x > 0.0, "bessel_y needs x > 0");
    let mf = m as f64;
    let first = integrate_adaptive(|t| (x * t.sin() - mf * t).sin(), 0.0, PI, 1e-14) / PI;
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    // e^{-x sinh t} is below 1e-300 well before t_max
    let t_max = ((700.0 / x) + 1.0).asinh() + 1.0;
    let second =
        integrate_adaptive(|t| ((mf * t).exp() + sign * (-mf * t).exp()) * (-x * t.sinh()).exp(), 0.0, t_max, 1e-14)
            / PI;
    first - second
}

/// Find the first `count` roots of `f` on `(lo, hi)` by scanning with step `dx`
/// and refining each sign change by bisection.
pub fn bracket_roots<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, dx: f64, count: usize) -> Vec<f64> {
    let mut roots = Vec::with_capacity(count);
    let mut a = lo;
    let mut fa = f(a);
    while roots.len() < count && a < hi {
        let b = (a + dx).min(hi);
        let fb = f(b);
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            let (mut l, mut r, mut fl) = (a, b, fa);
            for _ in 0..200 {
                let m = 0.5 * (l + r);
                let fm = f(m);
                if fm == 0.0 || (r - l) < 1e-15 * m.abs().max(1.0) {
                    l = m;
                    r = m;
                    break;
                }
                if fl * fm < 0.0 {
                    r = m;
                } else {
                    l = m;
                    fl = fm;
                }
            }
            roots.push(0.5 * (l + r));
        }
        a = b;
        fa = fb;
    }
    roots
}

/// The first `count` positive zeros of J_m.
pub fn bessel_j_zeros(m: i32, count: usize) -> Vec<f64> {
    bracket_roots(|x| bessel_j(m, x), 1e-6, 1e4, 0.05, count)
}
