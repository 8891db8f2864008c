//! Frame independence of the constrained spectrum for rotationally
//! invariant cross-sections.

use super::field::curve_field;
use crate::framing::ThetaProfile;
use crate::geometry::curve::CurveGeometry;
use crate::solver::{discretize_tangential, eigensolve};
use crate::transverse::ModeSet;
use crate::{Error, Result};
use std::sync::Arc;

/// Tolerance on `Lambda2 - Lambda Lambda` for a Casimir-eigenstate cluster.
pub const CASIMIR_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct InvarianceReport {
    pub spectrum_a: Vec<f64>,
    pub spectrum_b: Vec<f64>,
    pub max_difference: f64,
    pub lambda2_minus_product: f64,
}

/// Lowest `count` levels of `H_par` in two potential frames and their largest
/// difference.
pub fn rotational_invariance_check(
    curve: &CurveGeometry,
    modes: Arc<ModeSet>,
    frame_a: &ThetaProfile,
    frame_b: &ThetaProfile,
    count: usize,
) -> Result<InvarianceReport> {
    let lambda2_minus_product = modes.lambda2_minus_product();
    if lambda2_minus_product > CASIMIR_TOL * modes.hbar * modes.hbar {
        return Err(Error::InvalidInput(format!(
            "modes are not a Casimir eigenbasis: |Lambda2 - Lambda Lambda| = {lambda2_minus_product:e}"
        )));
    }
    let levels = |theta: &ThetaProfile| -> Result<Vec<f64>> {
        let field = curve_field(curve, theta, modes.clone())?;
        let op = discretize_tangential(&field)?;
        Ok(eigensolve(&op, count)?.values)
    };
    let spectrum_a = levels(frame_a)?;
    let spectrum_b = levels(frame_b)?;
    let max_difference = spectrum_a.iter().zip(&spectrum_b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(InvarianceReport { spectrum_a, spectrum_b, max_difference, lambda2_minus_product })
}
