//! Full two-dimensional reference solve for a hard-wall strip around a
//! planar curve.
//!
//! Coordinates `(alpha, u)` with `x = gamma(alpha) + u n(alpha)`, `n` the left
//! normal, give the metric `(1 - kappa u)^2 dalpha^2 + du^2`. The transverse
//! direction uses a Legendre basis vanishing at `u = +- eps/2`; `alpha` uses
//! second-order differences on the curve samples.

use super::eigen::{eigensolve, Basis, DiscretizedOperator, OperatorMatrix, Spectrum};
use crate::geometry::curve::CurveGeometry;
use crate::numerics::quad::gauss_legendre;
use crate::numerics::sparse::TripletBuilder;
use crate::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StripGrid {
    /// Transverse basis functions.
    pub n_modes: usize,
    /// Re-solve with four more transverse functions and fail if the lowest
    /// level above threshold moves by more than 1%.
    #[serde(default)]
    pub check_resolution: bool,
}

impl Default for StripGrid {
    fn default() -> Self {
        Self { n_modes: 12, check_resolution: false }
    }
}

/// Threshold `hbar^2 pi^2 / (2 eps^2)` of a hard-wall strip of width `eps`.
pub fn strip_transverse_energy(epsilon: f64, hbar: f64) -> f64 {
    let p = std::f64::consts::PI * hbar / epsilon;
    0.5 * p * p
}

fn legendre_all(n: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; n.max(2)];
    p[0] = 1.0;
    p[1] = x;
    for j in 1..n - 1 {
        p[j + 1] = ((2 * j + 1) as f64 * x * p[j] - j as f64 * p[j - 1]) / (j + 1) as f64;
    }
    p
}

/// Values and `u`-derivatives of `phi_j = P_j - P_{j+2}` at the quadrature
/// nodes of `[-eps/2, eps/2]`.
struct TransverseBasis {
    u: Vec<f64>,
    w: Vec<f64>,
    phi: Vec<Vec<f64>>,
    dphi: Vec<Vec<f64>>,
}

impl TransverseBasis {
    fn new(n: usize, epsilon: f64) -> Self {
        let (x, wx) = gauss_legendre(2 * n + 24);
        let half = 0.5 * epsilon;
        let mut phi = vec![vec![0.0; x.len()]; n];
        let mut dphi = vec![vec![0.0; x.len()]; n];
        for (q, &xq) in x.iter().enumerate() {
            let p = legendre_all(n + 3, xq);
            for j in 0..n {
                phi[j][q] = p[j] - p[j + 2];
                dphi[j][q] = -((2 * j + 3) as f64) * p[j + 1] / half;
            }
        }
        Self { u: x.iter().map(|v| v * half).collect(), w: wx.iter().map(|v| v * half).collect(), phi, dphi }
    }

    fn gram<F: Fn(f64) -> f64>(&self, f: F, deriv: bool) -> DMatrix<f64> {
        let n = self.phi.len();
        let b = if deriv { &self.dphi } else { &self.phi };
        let fw: Vec<f64> = self.u.iter().zip(&self.w).map(|(u, w)| w * f(*u)).collect();
        DMatrix::from_fn(n, n, |i, j| b[i].iter().zip(&b[j]).zip(&fw).map(|((p, q), c)| p * q * c).sum())
    }
}

/// Checks that the strip of full width `eps` is a tubular neighbourhood:
/// `|kappa| eps / 2 < 1` everywhere and no two distant samples come closer
/// than `eps`.
pub fn check_tubular(curve: &CurveGeometry, epsilon: f64) -> Result<()> {
    let kappas = curve.signed_curvatures();
    for (s, k) in curve.samples.iter().zip(&kappas) {
        if k.abs() * epsilon / 2.0 >= 1.0 {
            return Err(Error::SelfIntersection { width: epsilon, alpha: s.alpha });
        }
    }
    let n = curve.len();
    for i in 0..n {
        for j in i + 1..n {
            let mut sep = curve.samples[j].alpha - curve.samples[i].alpha;
            if curve.closed {
                sep = sep.min(curve.length - sep);
            }
            if sep > 2.0 * epsilon && (curve.samples[j].x - curve.samples[i].x).norm() < epsilon {
                return Err(Error::SelfIntersection { width: epsilon, alpha: curve.samples[i].alpha });
            }
        }
    }
    Ok(())
}

fn planar_check(curve: &CurveGeometry) -> Result<()> {
    let z0 = curve.samples[0].x[2];
    for s in &curve.samples {
        if (s.x[2] - z0).abs() > 1e-9 || s.frame.t[2].abs() > 1e-9 {
            return Err(Error::InvalidInput("strip reference solve needs a curve in a plane z = const".into()));
        }
    }
    Ok(())
}

/// Assembles the symmetric matrix `L^{-1} A L^{-T}` of the strip Hamiltonian,
/// where `A` is the energy form and `L L^T` the block-diagonal mass matrix.
pub fn strip_operator(curve: &CurveGeometry, epsilon: f64, n_modes: usize, hbar: f64) -> Result<DiscretizedOperator> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput(format!("strip width must be positive, got {epsilon}")));
    }
    if n_modes < 1 {
        return Err(Error::InvalidInput("need at least one transverse function".into()));
    }
    planar_check(curve)?;
    check_tubular(curve, epsilon)?;
    let kappa_all = curve.signed_curvatures();
    let (kappa, periodic): (Vec<f64>, bool) =
        if curve.closed { (kappa_all, true) } else { (kappa_all[1..kappa_all.len() - 1].to_vec(), false) };
    let n = kappa.len();
    let h = curve.spacing();
    let basis = TransverseBasis::new(n_modes, epsilon);
    let c = hbar * hbar / 2.0;

    let mut inv_l = Vec::with_capacity(n);
    let mut diag: Vec<DMatrix<f64>> = Vec::with_capacity(n);
    for &k in &kappa {
        let mass = basis.gram(|u| 1.0 - k * u, false);
        let chol = mass.cholesky().ok_or_else(|| Error::InvalidInput("strip mass matrix is not definite".into()))?;
        inv_l.push(chol.l().try_inverse().ok_or_else(|| Error::InvalidInput("singular mass factor".into()))?);
        diag.push(basis.gram(|u| 1.0 - k * u, true) * c);
    }
    let link = |ka: f64, kb: f64| {
        let km = 0.5 * (ka + kb);
        basis.gram(|u| 1.0 / (1.0 - km * u), false) * (c / (h * h))
    };
    let mut off: Vec<(usize, usize, DMatrix<f64>)> = Vec::new();
    let links = if periodic { n } else { n - 1 };
    for a in 0..links {
        let b = (a + 1) % n;
        let cl = link(kappa[a], kappa[b]);
        diag[a] += &cl;
        diag[b] += &cl;
        off.push((a, b, -cl));
    }
    if !periodic {
        diag[0] += link(kappa[0], kappa[0]);
        diag[n - 1] += link(kappa[n - 1], kappa[n - 1]);
    }
    let nm = n_modes;
    let mut trip = TripletBuilder::<f64>::new(n * nm);
    for a in 0..n {
        let blk = &inv_l[a] * &diag[a] * inv_l[a].transpose();
        let blk = (&blk + blk.transpose()) * 0.5;
        for i in 0..nm {
            for j in 0..nm {
                trip.push(a * nm + i, a * nm + j, blk[(i, j)]);
            }
        }
    }
    for (a, b, m) in off {
        let blk = &inv_l[a] * m * inv_l[b].transpose();
        for i in 0..nm {
            for j in 0..nm {
                trip.push_hermitian(a * nm + i, b * nm + j, blk[(i, j)]);
            }
        }
    }
    Ok(DiscretizedOperator {
        matrix: OperatorMatrix::Real(trip.build()),
        basis: Basis::NodeTransverse,
        block: nm,
        periodic,
    })
}

/// Lowest `count` eigenvalues of the full strip problem.
pub fn ambient_oracle_2d(
    curve: &CurveGeometry,
    epsilon: f64,
    grid: &StripGrid,
    count: usize,
    hbar: f64,
) -> Result<Spectrum> {
    let op = strip_operator(curve, epsilon, grid.n_modes, hbar)?;
    let mut spec = eigensolve(&op, count)?;
    spec.vectors = None;
    if grid.check_resolution {
        let finer = strip_operator(curve, epsilon, grid.n_modes + 4, hbar)?;
        let fine = eigensolve(&finer, 1)?;
        let threshold = strip_transverse_energy(epsilon, hbar);
        let scale = (fine.values[0] - threshold).abs().max(hbar * hbar / (curve.length * curve.length));
        let shift = (fine.values[0] - spec.values[0]).abs();
        if shift > 0.01 * scale {
            return Err(Error::ResolutionInsufficient(format!(
                "lowest strip level moved by {shift:e} with {} extra transverse functions",
                4
            )));
        }
    }
    Ok(spec)
}
