//! Exact reference spectrum of a straight tube whose harmonic cross-section
//! rotates at a constant rate, in the co-rotating frame.
//!
//! Each axial momentum `k = 2 pi j / L` gives the block
//! `(hbar k + 2 S0 Lambda_12)^2 / 2 + H_perp` on Fock states
//! `n_1 + n_2 <= n_basis`, with `Lambda_12 Lambda_12` evaluated without
//! truncating the intermediate states.

use super::eigen::Spectrum;
use crate::transverse::harmonic::{harmonic_energy, harmonic_lambda_matrices};
use crate::transverse::{PotentialKind, TransversePotential};
use crate::{Error, Result, C64};
use nalgebra::DMatrix;

/// Fock states with at most `n_basis` quanta in total.
pub fn fock_basis(d: usize, n_basis: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|b| {
                let used: usize = b.iter().sum();
                (0..=n_basis - used).map(move |k| {
                    let mut c = b.clone();
                    c.push(k);
                    c
                })
            })
            .collect();
    }
    out
}

fn block_levels(omega: &[f64], s0: f64, k: f64, hbar: f64, n_basis: usize, count: usize) -> Vec<f64> {
    let h = twisted_block(omega, s0, k, hbar, n_basis);
    let n = h.nrows();
    let h = (&h + h.adjoint()) * C64::from(0.5);
    let mut v: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.truncate(count.min(n));
    v
}

/// Lowest `count` levels of the twisted tube of length `length` (periodic),
/// cross-section `pot` scaled to width `epsilon`, axial momenta `|j| <= j_max`.
pub fn ambient_oracle_3d_twisted(
    s0: f64,
    pot: &TransversePotential,
    length: f64,
    epsilon: f64,
    n_basis: usize,
    j_max: usize,
    count: usize,
) -> Result<Spectrum> {
    let omega = match &pot.scaled(epsilon).kind {
        PotentialKind::Harmonic { omega } if omega.len() == 2 => omega.clone(),
        _ => return Err(Error::InvalidInput("twisted reference solve needs a planar harmonic cross-section".into())),
    };
    if !(length > 0.0) {
        return Err(Error::InvalidInput("tube length must be positive".into()));
    }
    let hbar = pot.hbar;
    let levels = |nb: usize| -> Vec<f64> {
        let mut all: Vec<f64> = (-(j_max as i64)..=j_max as i64)
            .flat_map(|j| {
                let k = 2.0 * std::f64::consts::PI * j as f64 / length;
                block_levels(&omega, s0, k, hbar, nb, count)
            })
            .collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        all.truncate(count);
        all
    };
    let values = levels(n_basis);
    let check = levels(n_basis + 2);
    for (a, b) in values.iter().zip(&check) {
        if (a - b).abs() > 1e-8 * a.abs().max(1.0) {
            return Err(Error::TruncationInsufficient { shift: (a - b).abs() });
        }
    }
    Ok(Spectrum {
        residuals: vec![0.0; values.len()],
        values,
        vectors: None,
        method: "Fock-basis exact diagonalization".into(),
        iterations: 0,
    })
}

/// Ground level of the `k = 0` block, for small-twist fits.
pub fn twisted_ground_level(s0: f64, omega: &[f64], hbar: f64, n_basis: usize) -> f64 {
    block_levels(omega, s0, 0.0, hbar, n_basis, 1)[0]
}

/// Matrix of the axial-momentum `k` block; `Lambda2[5]` is the (1,2,1,2)
/// component.
pub fn twisted_block(omega: &[f64], s0: f64, k: f64, hbar: f64, n_basis: usize) -> DMatrix<C64> {
    let basis = fock_basis(2, n_basis);
    let (lambda, lambda2) = harmonic_lambda_matrices(omega, &basis, hbar);
    let mut h = &lambda[1] * C64::from(2.0 * hbar * k * s0) + &lambda2[5] * C64::from(2.0 * s0 * s0);
    for (i, occ) in basis.iter().enumerate() {
        h[(i, i)] += C64::from(0.5 * hbar * hbar * k * k + harmonic_energy(omega, occ, hbar));
    }
    h
}
