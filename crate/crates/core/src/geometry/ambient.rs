//! Ambient Riemannian manifold: metric, Christoffel symbols and curvature.

use crate::numerics::fd;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use std::fmt;
use std::sync::Arc;

pub type MetricFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// An ambient space `R^N` with a (possibly curved) metric in global coordinates.
#[derive(Clone)]
pub struct AmbientSpace {
    dim: usize,
    metric: Option<MetricFn>,
    pub fd_step: f64,
}

impl fmt::Debug for AmbientSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AmbientSpace")
            .field("dim", &self.dim)
            .field("flat", &self.is_flat())
            .field("fd_step", &self.fd_step)
            .finish()
    }
}

impl AmbientSpace {
    /// Flat Euclidean space.
    pub fn flat(dim: usize) -> Self {
        assert!(dim >= 2, "ambient dimension must be at least 2");
        Self { dim, metric: None, fd_step: 1e-3 }
    }

    pub fn with_metric(dim: usize, metric: MetricFn, fd_step: f64) -> Self {
        assert!(dim >= 2 && fd_step > 0.0);
        Self { dim, metric: Some(metric), fd_step }
    }

    /// Round 2-sphere of radius `a` in coordinates (theta, phi).
    pub fn sphere(a: f64) -> Self {
        Self::with_metric(
            2,
            Arc::new(move |x: &[f64]| {
                DMatrix::from_diagonal(&DVector::from_vec(vec![a * a, a * a * x[0].sin().powi(2)]))
            }),
            1e-3,
        )
    }

    /// Upper half-plane model of the hyperbolic plane, `(dx^2 + dy^2) / y^2`.
    pub fn hyperbolic_plane() -> Self {
        Self::with_metric(2, Arc::new(|x: &[f64]| DMatrix::identity(2, 2) / (x[1] * x[1])), 1e-3)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_flat(&self) -> bool {
        self.metric.is_none()
    }

    fn raw_metric(&self, x: &[f64]) -> DMatrix<f64> {
        match &self.metric {
            None => DMatrix::identity(self.dim, self.dim),
            Some(g) => g(x),
        }
    }

    /// Metric at `x`, validated to be symmetric and positive definite.
    pub fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let g = self.raw_metric(x);
        if g.nrows() != self.dim || g.ncols() != self.dim {
            return Err(Error::ShapeMismatch(format!(
                "metric is {}x{}, expected {}x{}",
                g.nrows(),
                g.ncols(),
                self.dim,
                self.dim
            )));
        }
        let asym = (&g - g.transpose()).amax();
        if asym > 1e-12 * g.amax().max(1.0) || g.clone().cholesky().is_none() {
            return Err(Error::SingularMetric { point: x.to_vec() });
        }
        Ok(g)
    }

    pub fn inner(&self, x: &[f64], u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
        if self.is_flat() {
            return Ok(u.dot(v));
        }
        Ok(u.dot(&(self.metric(x)? * v)))
    }

    /// Christoffel symbols of the second kind, `gamma[a][b][c] = Gamma^a_{bc}`,
    /// flattened as `a * N^2 + b * N + c`.
    pub fn christoffel(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim;
        if self.is_flat() {
            return Ok(vec![0.0; n * n * n]);
        }
        let ginv = self.metric(x)?.try_inverse().ok_or_else(|| Error::SingularMetric { point: x.to_vec() })?;
        let dg: Vec<DMatrix<f64>> =
            (0..n).map(|axis| fd::partial(|q: &[f64]| self.raw_metric(q), x, axis, self.fd_step)).collect();
        let mut gamma = vec![0.0; n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut s = 0.0;
                    for d in 0..n {
                        s += ginv[(a, d)] * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)]);
                    }
                    gamma[(a * n + b) * n + c] = 0.5 * s;
                }
            }
        }
        Ok(gamma)
    }

    /// Covariant derivative correction `Gamma^a_{bc} u^b v^c`.
    pub fn connection_term(&self, x: &[f64], u: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.dim;
        if self.is_flat() {
            return Ok(DVector::zeros(n));
        }
        let gamma = self.christoffel(x)?;
        Ok(DVector::from_fn(n, |a, _| {
            let mut s = 0.0;
            for b in 0..n {
                for c in 0..n {
                    s += gamma[(a * n + b) * n + c] * u[b] * v[c];
                }
            }
            s
        }))
    }

    /// All-lower Riemann tensor `R_{abcd}` in the coordinate basis.
    pub fn riemann(&self, x: &[f64]) -> Result<Riemann> {
        let n = self.dim;
        if self.is_flat() {
            return Ok(Riemann::zeros(n));
        }
        let g = self.metric(x)?;
        let gamma = self.christoffel(x)?;
        let h = fd::scaled_step(self.fd_step, 2);
        let mut dgamma = Vec::with_capacity(n);
        for axis in 0..n {
            let d = fd::partial(
                |q: &[f64]| DVector::from_vec(self.christoffel(q).unwrap_or_else(|_| vec![f64::NAN; n * n * n])),
                x,
                axis,
                h,
            );
            if d.iter().any(|v| !v.is_finite()) {
                return Err(Error::SingularMetric { point: x.to_vec() });
            }
            dgamma.push(d);
        }
        let gi = |a: usize, b: usize, c: usize| gamma[(a * n + b) * n + c];
        // R^r_{s m v} = d_m G^r_{v s} - d_v G^r_{m s} + G^r_{m l} G^l_{v s} - G^r_{v l} G^l_{m s}
        let mut up = vec![0.0; n * n * n * n];
        for r in 0..n {
            for s in 0..n {
                for m in 0..n {
                    for v in 0..n {
                        let mut val = dgamma[m][(r * n + v) * n + s] - dgamma[v][(r * n + m) * n + s];
                        for l in 0..n {
                            val += gi(r, m, l) * gi(l, v, s) - gi(r, v, l) * gi(l, m, s);
                        }
                        up[((r * n + s) * n + m) * n + v] = val;
                    }
                }
            }
        }
        let mut out = Riemann::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let mut s = 0.0;
                        for r in 0..n {
                            s += g[(a, r)] * up[((r * n + b) * n + c) * n + d];
                        }
                        out.set(a, b, c, d, s);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Scalar curvature `g^{ac} g^{bd} R_{abcd}` (positive on spheres).
    pub fn scalar_curvature(&self, x: &[f64]) -> Result<f64> {
        let n = self.dim;
        let r = self.riemann(x)?;
        let ginv = self.metric(x)?.try_inverse().ok_or_else(|| Error::SingularMetric { point: x.to_vec() })?;
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        s += ginv[(a, c)] * ginv[(b, d)] * r.get(a, b, c, d);
                    }
                }
            }
        }
        Ok(s)
    }
}

/// Rank-4 covariant tensor with dense storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Riemann {
    n: usize,
    data: Vec<f64>,
}

impl Riemann {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n.pow(4)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, a: usize, b: usize, c: usize, d: usize) -> usize {
        ((a * self.n + b) * self.n + c) * self.n + d
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[self.idx(a, b, c, d)]
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: f64) {
        let i = self.idx(a, b, c, d);
        self.data[i] = v;
    }

    /// Components in the frame `e` (each a coordinate vector).
    pub fn in_frame(&self, e: &[DVector<f64>]) -> Riemann {
        let n = self.n;
        let k = e.len();
        // contract one index at a time
        let mut cur = self.data.clone();
        let mut dims = [n, n, n, n];
        for slot in 0..4 {
            let mut next = vec![0.0; cur.len() / dims[slot] * k];
            let mut nd = dims;
            nd[slot] = k;
            for a in 0..nd[0] {
                for b in 0..nd[1] {
                    for c in 0..nd[2] {
                        for d in 0..nd[3] {
                            let idx = [a, b, c, d];
                            let mut s = 0.0;
                            for p in 0..dims[slot] {
                                let mut src = idx;
                                src[slot] = p;
                                let si = ((src[0] * dims[1] + src[1]) * dims[2] + src[2]) * dims[3] + src[3];
                                s += cur[si] * e[idx[slot]][p];
                            }
                            next[((a * nd[1] + b) * nd[2] + c) * nd[3] + d] = s;
                        }
                    }
                }
            }
            cur = next;
            dims = nd;
        }
        Riemann { n: k, data: cur }
    }

    /// Largest violation of the antisymmetries, the pair symmetry and the
    /// first Bianchi identity.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let r = self.get(a, b, c, d);
                        worst = worst
                            .max((r + self.get(b, a, c, d)).abs())
                            .max((r + self.get(a, b, d, c)).abs())
                            .max((r - self.get(c, d, a, b)).abs())
                            .max((r + self.get(a, c, d, b) + self.get(a, d, b, c)).abs());
                    }
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_space_has_no_curvature() {
        let s = AmbientSpace::flat(3);
        let r = s.riemann(&[0.3, -1.0, 2.0]).unwrap();
        assert_eq!(r.max_abs(), 0.0);
        // a flat metric in polar coordinates is still flat
        let polar = AmbientSpace::with_metric(
            2,
            Arc::new(|x: &[f64]| DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, x[0] * x[0]]))),
            1e-3,
        );
        assert!(polar.riemann(&[1.3, 0.4]).unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn singular_metric_is_rejected() {
        let s = AmbientSpace::with_metric(2, Arc::new(|_: &[f64]| DMatrix::from_diagonal_element(2, 2, -1.0)), 1e-3);
        assert!(matches!(s.metric(&[0.0, 0.0]), Err(Error::SingularMetric { .. })));
    }

    #[test]
    fn frame_change_preserves_symmetries() {
        let s = AmbientSpace::sphere(1.5);
        let x = [0.9, 0.2];
        let r = s.riemann(&x).unwrap();
        let g = s.metric(&x).unwrap();
        let e = vec![
            DVector::from_vec(vec![1.0 / g[(0, 0)].sqrt(), 0.0]),
            DVector::from_vec(vec![0.0, 1.0 / g[(1, 1)].sqrt()]),
        ];
        let rf = r.in_frame(&e);
        // sectional curvature of the sphere
        assert!((rf.get(0, 1, 0, 1) - 1.0 / 2.25).abs() < 1e-7);
        assert!(rf.symmetry_residual() < 1e-7);
    }
}
