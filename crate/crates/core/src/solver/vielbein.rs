//! Kinetic energy on a periodic interval with metric `g(x)`, directly and in
//! the rescaled form with `psi = G^{1/4} phi`.

use crate::C64;
use nalgebra::DMatrix;
use std::f64::consts::PI;

/// Fourier differentiation matrix on `n` (even) equispaced nodes of a period
/// `length`.
pub fn fourier_d1(n: usize, length: f64) -> DMatrix<f64> {
    let h = 2.0 * PI / n as f64;
    let scale = 2.0 * PI / length;
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            let k = i as f64 - j as f64;
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            scale * 0.5 * sign / (0.5 * k * h).tan()
        }
    })
}

#[derive(Debug, Clone)]
pub struct VielbeinCheck {
    pub direct: Vec<f64>,
    pub scaled: Vec<f64>,
    /// Largest |difference| / max(1, |eigenvalue|) over the compared levels.
    pub max_difference: f64,
    /// Largest |V_s|.
    pub max_vs: f64,
}

/// Compares the spectra of `-(hbar^2/2) G^{-1/4} D G^{-1/2} D G^{-1/4}` (the
/// Laplacian written for half densities) and
/// `-(hbar^2/2) D G^{-1} D + V_s`, `V_s = (hbar^2/2)[(G^{-1} s')' + G^{-1} s'^2]`
/// with `s = ln G^{1/4}`, over the lowest `compare` levels.
///
/// The operators use the Fourier derivative with the Nyquist wavenumber kept
/// as `+n/2`, which makes `D` skew-Hermitian without a spurious null vector.
pub fn vielbein_kinetic_check<F: Fn(f64) -> f64>(
    metric: F,
    length: f64,
    n: usize,
    compare: usize,
    hbar: f64,
) -> VielbeinCheck {
    assert!(n % 2 == 0 && n >= 8, "grid size must be even");
    let x: Vec<f64> = (0..n).map(|i| length * i as f64 / n as f64).collect();
    let g: Vec<f64> = x.iter().map(|&v| metric(v)).collect();
    let d = fourier_d1(n, length);
    let nyquist = PI * n as f64 / length / n as f64;
    let dc = DMatrix::from_fn(n, n, |i, j| {
        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        C64::new(d[(i, j)], sign * nyquist)
    });
    let c = hbar * hbar / 2.0;
    // D^H diag(w) D, with diagonal factors applied as row scalings
    let weighted = |w: &dyn Fn(f64) -> f64| {
        let mut wd = dc.clone();
        for (i, gv) in g.iter().enumerate() {
            wd.row_mut(i).scale_mut(w(*gv));
        }
        dc.ad_mul(&wd)
    };
    let mut direct = weighted(&|v| v.powf(-0.5));
    for i in 0..n {
        for j in 0..n {
            direct[(i, j)] *= c * g[i].powf(-0.25) * g[j].powf(-0.25);
        }
    }

    let sigma = nalgebra::DVector::from_iterator(n, g.iter().map(|v| 0.25 * v.ln()));
    let ds = &d * &sigma;
    let flux = nalgebra::DVector::from_iterator(n, ds.iter().zip(&g).map(|(s, gv)| s / gv));
    let dflux = &d * &flux;
    let vs: Vec<f64> = (0..n).map(|i| c * (dflux[i] + ds[i] * ds[i] / g[i])).collect();
    let mut scaled = weighted(&|v| 1.0 / v) * C64::from(c);
    for (i, v) in vs.iter().enumerate() {
        scaled[(i, i)] += C64::from(*v);
    }
    let spec = |m: DMatrix<C64>| {
        let sym = (&m + m.adjoint()) * C64::from(0.5);
        let mut v: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.truncate(compare);
        v
    };
    let a = spec(direct);
    let b = spec(scaled);
    let max_difference = a.iter().zip(&b).map(|(p, q)| (p - q).abs() / p.abs().max(1.0)).fold(0.0, f64::max);
    VielbeinCheck { direct: a, scaled: b, max_difference, max_vs: vs.iter().map(|v| v.abs()).fold(0.0, f64::max) }
}
