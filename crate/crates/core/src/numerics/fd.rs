//! Fourth-order central finite-difference stencils.
//!
//! Higher derivatives amplify round-off as `h^-k`, so nested or high-order
//! derivatives use [`scaled_step`] to widen the base step.

use std::ops::{Add, Mul, Sub};

/// Step for a `k`-th derivative given the base step `h` of the first
/// derivative: `h^(5 / (4 + k))`, which balances truncation against round-off
/// for fourth-order stencils when `h` is near its optimum.
pub fn scaled_step(h: f64, order: u32) -> f64 {
    if order <= 1 {
        h
    } else {
        h.powf(5.0 / (4.0 + order as f64))
    }
}

pub fn d1<T, F>(f: F, x: f64, h: f64) -> T
where
    F: Fn(f64) -> T,
    T: Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    (f(x - 2.0 * h) - f(x + 2.0 * h) + (f(x + h) - f(x - h)) * 8.0) * (1.0 / (12.0 * h))
}

pub fn d2<T, F>(f: F, x: f64, h: f64) -> T
where
    F: Fn(f64) -> T,
    T: Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    ((f(x + h) + f(x - h)) * 16.0 - f(x + 2.0 * h) - f(x - 2.0 * h) - f(x) * 30.0) * (1.0 / (12.0 * h * h))
}

pub fn d3<T, F>(f: F, x: f64, h: f64) -> T
where
    F: Fn(f64) -> T,
    T: Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    // (-f3 + 8 f2 - 13 f1 + 13 f-1 - 8 f-2 + f-3) / (8 h^3)
    ((f(x - 3.0 * h) - f(x + 3.0 * h)) + (f(x + 2.0 * h) - f(x - 2.0 * h)) * 8.0 + (f(x - h) - f(x + h)) * 13.0)
        * (1.0 / (8.0 * h * h * h))
}

/// Partial derivative of a multivariate function along coordinate `axis`.
pub fn partial<T, F>(f: F, p: &[f64], axis: usize, h: f64) -> T
where
    F: Fn(&[f64]) -> T,
    T: Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    d1(
        |x| {
            let mut q = p.to_vec();
            q[axis] = x;
            f(&q)
        },
        p[axis],
        h,
    )
}

/// Fourth-order derivative of periodic samples on a uniform grid.
pub fn periodic_d1(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let at = |i: isize| values[i.rem_euclid(n as isize) as usize];
    (0..n as isize).map(|i| (at(i - 2) - at(i + 2) + 8.0 * (at(i + 1) - at(i - 1))) / (12.0 * h)).collect()
}

/// Fourth-order derivative of samples on a uniform open grid; the two points
/// at each end use one-sided fourth-order stencils.
pub fn open_d1(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 5, "need at least five samples");
    let v = values;
    (0..n)
        .map(|i| {
            if i >= 2 && i + 2 < n {
                (v[i - 2] - v[i + 2] + 8.0 * (v[i + 1] - v[i - 1])) / (12.0 * h)
            } else if i < 2 {
                (-25.0 * v[i] + 48.0 * v[i + 1] - 36.0 * v[i + 2] + 16.0 * v[i + 3] - 3.0 * v[i + 4]) / (12.0 * h)
            } else {
                (25.0 * v[i] - 48.0 * v[i - 1] + 36.0 * v[i - 2] - 16.0 * v[i - 3] + 3.0 * v[i - 4]) / (12.0 * h)
            }
        })
        .collect()
}
