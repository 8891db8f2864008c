//! Cubic splines through tabulated samples (natural or periodic ends).

use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    // second derivatives at the knots
    m: Vec<f64>,
    periodic: bool,
}

impl CubicSpline {
    pub fn natural(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_knots(&x, &y)?;
        let n = x.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            let k = n - 2;
            let mut sub = vec![0.0; k];
            let mut diag = vec![0.0; k];
            let mut sup = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                sub[i - 1] = h0;
                diag[i - 1] = 2.0 * (h0 + h1);
                sup[i - 1] = h1;
                rhs[i - 1] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            }
            let inner = solve_tridiagonal(&sub, &diag, &sup, &rhs);
            m[1..n - 1].copy_from_slice(&inner);
        }
        Ok(Self { x, y, m, periodic: false })
    }

    /// Periodic spline; `x` holds one period of knots and `period` closes it.
    pub fn periodic(mut x: Vec<f64>, mut y: Vec<f64>, period: f64) -> Result<Self> {
        check_knots(&x, &y)?;
        if x.len() < 3 {
            return Err(Error::InvalidInput("periodic spline needs at least 3 knots".into()));
        }
        x.push(x[0] + period);
        y.push(y[0]);
        let n = x.len() - 1;
        let h = |i: usize| x[(i % n) + 1] - x[i % n];
        let mut a = vec![vec![0.0; n]; n];
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            let im = (i + n - 1) % n;
            let h0 = h(im);
            let h1 = h(i);
            a[i][im] += h0;
            a[i][i] += 2.0 * (h0 + h1);
            a[i][(i + 1) % n] += h1;
            let yp = y[i + 1];
            let ym = if i == 0 { y[n - 1] } else { y[i - 1] };
            rhs[i] = 6.0 * ((yp - y[i]) / h1 - (y[i] - ym) / h0);
        }
        let mat = nalgebra::DMatrix::from_fn(n, n, |i, j| a[i][j]);
        let sol = mat
            .lu()
            .solve(&nalgebra::DVector::from_vec(rhs))
            .ok_or_else(|| Error::InvalidInput("singular periodic spline system".into()))?;
        let mut m: Vec<f64> = sol.iter().copied().collect();
        m.push(m[0]);
        Ok(Self { x, y, m, periodic: true })
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let n = self.x.len();
        let mut t = t;
        if self.periodic {
            let p = self.x[n - 1] - self.x[0];
            t = self.x[0] + (t - self.x[0]).rem_euclid(p);
        }
        let i = match self.x.partition_point(|&k| k <= t) {
            0 => 0,
            j => (j - 1).min(n - 2),
        };
        (i, t)
    }

    /// Value and first three derivatives at `t`.
    pub fn eval_all(&self, t: f64) -> [f64; 4] {
        let (i, t) = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let v = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 = (y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0 + (3.0 * b * b - 1.0) / 6.0 * h * m1;
        let d2 = a * m0 + b * m1;
        let d3 = (m1 - m0) / h;
        [v, d1, d2, d3]
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_all(t)[0]
    }
}

fn check_knots(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidInput("spline needs matching knot arrays of length >= 2".into()));
    }
    if x.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("spline knots must be strictly increasing".into()));
    }
    Ok(())
}

/// Thomas algorithm for a diagonally dominant tridiagonal system.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / den;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn periodic_spline_tracks_sine() {
        let n = 200;
        let x: Vec<f64> = (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect();
        let y: Vec<f64> = x.iter().map(|t| t.sin()).collect();
        let s = CubicSpline::periodic(x, y, 2.0 * PI).unwrap();
        for &t in &[0.1, 2.0, 6.2, 7.0, -0.5] {
            let v = s.eval_all(t);
            assert!((v[0] - f64::sin(t)).abs() < 1e-7);
            assert!((v[1] - f64::cos(t)).abs() < 1e-4);
        }
    }

    #[test]
    fn natural_spline_reproduces_lines() {
        let s = CubicSpline::natural(vec![0.0, 0.5, 2.0, 3.0], vec![1.0, 2.0, 5.0, 7.0]).unwrap();
        assert!((s.eval(1.0) - 3.0).abs() < 1e-14);
        assert!(CubicSpline::natural(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
    }
}
