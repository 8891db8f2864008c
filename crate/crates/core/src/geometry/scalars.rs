//! Curvature scalars entering the extrapotential.

use super::ambient::AmbientSpace;
use super::embedding::{embedding_geometry, Embedding, EmbeddingGeometry};
use crate::Result;
use nalgebra::DMatrix;
use serde::Serialize;
use std::sync::Arc;

/// Contractions of the second fundamental form and the ambient curvature.
///
/// `r_full` sums `R_{abab}` over all frame indices, `r_par` over tangent
/// pairs, `r_perp` over normal pairs and `r_mixed` over (tangent, normal)
/// pairs, so `r_full = r_par + r_perp + 2 r_mixed`. `r_hat` is the intrinsic
/// scalar curvature obtained from the Gauss equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureScalars {
    pub tsq: f64,
    pub msq: f64,
    pub r_full: f64,
    pub r_perp: f64,
    pub r_par: f64,
    pub r_mixed: f64,
    pub r_hat: f64,
}

impl CurvatureScalars {
    /// Residual of `T^2 = M^2 - R_hat + R_par`.
    pub fn gauss_residual(&self) -> f64 {
        (self.tsq - self.msq + self.r_hat - self.r_par).abs()
    }

    /// Scalars of a curve in flat space with curvature `kappa`.
    pub fn flat_curve(kappa: f64) -> Self {
        let k2 = kappa * kappa;
        Self { tsq: k2, msq: k2, r_full: 0.0, r_perp: 0.0, r_par: 0.0, r_mixed: 0.0, r_hat: 0.0 }
    }
}

/// Diagonal (a, a) terms vanish by antisymmetry and are skipped, so a single
/// normal direction gives `r_perp = 0` exactly.
pub fn curvature_scalars(geom: &EmbeddingGeometry) -> CurvatureScalars {
    let (m, d) = (geom.m, geom.d);
    let mut tsq = 0.0;
    let mut msq = 0.0;
    for mu in 0..d {
        let mut trace = 0.0;
        for i in 0..m {
            trace += geom.t_at(mu, i, i);
            for j in 0..m {
                tsq += geom.t_at(mu, i, j).powi(2);
            }
        }
        msq += trace * trace;
    }
    let r = &geom.r;
    let pair_sum = |a: std::ops::Range<usize>, b: std::ops::Range<usize>| {
        let mut s = 0.0;
        for x in a {
            for y in b.clone() {
                if x != y {
                    s += r.get(x, y, x, y);
                }
            }
        }
        s
    };
    let r_par = pair_sum(0..m, 0..m);
    let r_perp = pair_sum(m..m + d, m..m + d);
    let r_mixed = pair_sum(0..m, m..m + d);
    let r_full = pair_sum(0..m + d, 0..m + d);
    CurvatureScalars { tsq, msq, r_full, r_perp, r_par, r_mixed, r_hat: msq - tsq + r_par }
}

/// Scalar curvature of the induced metric computed intrinsically from the
/// embedding (independent of the second fundamental form).
pub fn intrinsic_scalar_curvature(space: &AmbientSpace, embed: Arc<dyn Embedding>, p: &[f64], h: f64) -> Result<f64> {
    let m = embed.param_dim();
    if m < 2 {
        return Ok(0.0);
    }
    let sp = space.clone();
    let e = embed.clone();
    let metric = Arc::new(move |x: &[f64]| -> DMatrix<f64> {
        let j = e.jacobian(x);
        let q = e.point(x);
        let g = sp.metric(q.as_slice()).unwrap_or_else(|_| DMatrix::from_element(q.len(), q.len(), f64::NAN));
        j.transpose() * g * j
    });
    AmbientSpace::with_metric(m, metric, h).scalar_curvature(p)
}

/// |intrinsic R_hat - (M^2 - T^2 + R_par)| at `p`.
pub fn gauss_equation_residual(space: &AmbientSpace, embed: Arc<dyn Embedding>, p: &[f64]) -> Result<f64> {
    let geom = embedding_geometry(space, embed.as_ref(), p, None)?;
    let sc = curvature_scalars(&geom);
    let intrinsic = intrinsic_scalar_curvature(space, embed, p, 3e-4)?;
    Ok((intrinsic - sc.r_hat).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::embedding::{Cylinder, Torus};

    #[test]
    fn cylinder_scalars() {
        let rho = 1.7;
        let g = embedding_geometry(&AmbientSpace::flat(3), &Cylinder { rho }, &[0.0, 0.4], None).unwrap();
        let s = curvature_scalars(&g);
        assert!((s.tsq - 1.0 / (rho * rho)).abs() < 1e-8);
        assert!((s.msq - 1.0 / (rho * rho)).abs() < 1e-8);
        assert!(s.r_hat.abs() < 1e-8);
        assert_eq!(s.r_perp, 0.0);
    }

    #[test]
    fn torus_outer_equator() {
        let space = AmbientSpace::flat(3);
        let torus = Torus { big: 2.0, small: 1.0 };
        let g = embedding_geometry(&space, &torus, &[0.3, 0.0], None).unwrap();
        assert!((curvature_scalars(&g).r_hat - 2.0 / 3.0).abs() < 1e-8);
        assert!(gauss_equation_residual(&space, Arc::new(torus), &[0.3, 0.0]).unwrap() < 1e-6);
    }
}
