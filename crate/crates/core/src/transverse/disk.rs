//! Closed-form modes of the hard-wall disk.

use super::modes::{planar_matrices, ModeLabels, ModeSet};
use crate::numerics::bessel::bessel_j_zeros;
use crate::{Error, Result, C64};
use nalgebra::DMatrix;

/// The `(m, 1)` cluster of a disk of radius `a`: for `m = 0` the single
/// radial mode, otherwise the pair `J_m(j r / a) e^{+- i m phi}` on which
/// `Lambda_12 = diag(m hbar / 2, -m hbar / 2)`.
pub fn disk_modes(radius: f64, m: usize, hbar: f64) -> Result<ModeSet> {
    if !(radius > 0.0) {
        return Err(Error::InvalidInput("disk radius must be positive".into()));
    }
    let j = bessel_j_zeros(m as i32, 1)[0];
    let e = hbar * hbar * j * j / (2.0 * radius * radius);
    let half = m as f64 * hbar / 2.0;
    let (l12, labels) = if m == 0 {
        (DMatrix::<C64>::zeros(1, 1), vec!["m=0".to_string()])
    } else {
        let mut l = DMatrix::<C64>::zeros(2, 2);
        l[(0, 0)] = C64::from(half);
        l[(1, 1)] = C64::from(-half);
        (l, vec![format!("m=+{m}"), format!("m=-{m}")])
    };
    let l1212 = &l12 * &l12;
    let k = l12.nrows();
    let (lambda, lambda2) = planar_matrices(l12, l1212);
    Ok(ModeSet {
        d: 2,
        hbar,
        energies: vec![e; k],
        labels: ModeLabels::Analytic(labels),
        lambda,
        lambda2,
        phase_convention: "angular momentum eigenstates".into(),
    })
}
