//! The extrapotential `V_ex` and its bookkeeping.

use crate::geometry::CurvatureScalars;
use crate::transverse::ModeSet;
use crate::{Error, Result, C64};
use nalgebra::DMatrix;
use serde::Serialize;

/// Relative agreement required between the equivalent scalar forms.
pub const FORM_TOL: f64 = 1e-12;

/// The three equivalent expressions of the preliminary extrapotential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PreliminaryForms {
    /// `-(hbar^2/8)(2 T^2 - M^2 + R - R_par - R_perp/3)`
    pub t_m: f64,
    /// `-(hbar^2/8)(T^2 - R_hat + R - R_perp/3)`
    pub t_rhat: f64,
    /// `-(hbar^2/8)(M^2 - 2 R_hat + R + R_par - R_perp/3)`
    pub m_rhat: f64,
}

impl PreliminaryForms {
    pub fn new(s: &CurvatureScalars, hbar: f64) -> Self {
        let c = -hbar * hbar / 8.0;
        Self {
            t_m: c * (2.0 * s.tsq - s.msq + s.r_full - s.r_par - s.r_perp / 3.0),
            t_rhat: c * (s.tsq - s.r_hat + s.r_full - s.r_perp / 3.0),
            m_rhat: c * (s.msq - 2.0 * s.r_hat + s.r_full + s.r_par - s.r_perp / 3.0),
        }
    }

    pub fn spread(&self) -> f64 {
        let v = [self.t_m, self.t_rhat, self.m_rhat];
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        hi - lo
    }
}

/// Preliminary extrapotential `V_ex^p`; all three forms are evaluated and must
/// agree.
pub fn extrapotential_preliminary(s: &CurvatureScalars, hbar: f64) -> Result<f64> {
    let forms = PreliminaryForms::new(s, hbar);
    let scale =
        [s.tsq, s.msq, s.r_full, s.r_par, s.r_perp, s.r_hat].iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0)
            * hbar
            * hbar;
    if forms.spread() > FORM_TOL * scale {
        return Err(Error::FormMismatch { forms: vec![forms.t_m, forms.t_rhat, forms.m_rhat] });
    }
    Ok(forms.t_m)
}

/// Pieces of `V_ex` at one point (units of energy).
#[derive(Debug, Clone)]
pub struct ExtrapotentialBreakdown {
    /// `-(hbar^2/8)(2 T^2 - M^2)`
    pub dacosta: f64,
    /// `-(hbar^2/8)(R - R_par - R_perp/3)`
    pub ambient: f64,
    /// `(1/2) S^{mu nu i} S^{s t}_i (Lambda2 - Lambda Lambda)`
    pub twist: DMatrix<C64>,
    /// `(1/6) R^{mu nu s t} Lambda2`
    pub riemann_lambda: DMatrix<C64>,
    /// Symmetrized sum of the above.
    pub total: DMatrix<C64>,
    /// |total - total^dagger| before symmetrization.
    pub hermitian_residual: f64,
}

impl ExtrapotentialBreakdown {
    /// |total - (dacosta + ambient) I - twist - riemann_lambda|.
    pub fn bookkeeping_residual(&self) -> f64 {
        let k = self.total.nrows();
        let id = DMatrix::<C64>::identity(k, k) * C64::from(self.dacosta + self.ambient);
        let raw = id + &self.twist + &self.riemann_lambda;
        let sym = (&raw + raw.adjoint()) * C64::from(0.5);
        (&self.total - sym).camax()
    }

    pub fn preliminary(&self) -> f64 {
        self.dacosta + self.ambient
    }
}

/// Largest non-Hermitian part tolerated before symmetrization.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Final extrapotential matrix.
///
/// `twist[i]` is `S_{mu nu i}` along an orthonormal tangent frame;
/// `riemann_normal(mu, nu, s, t)` are the normal-frame components of the
/// ambient curvature (omit for flat ambient spaces).
pub fn extrapotential(
    scalars: &CurvatureScalars,
    twist: &[DMatrix<f64>],
    riemann_normal: Option<&dyn Fn(usize, usize, usize, usize) -> f64>,
    modes: &ModeSet,
) -> Result<ExtrapotentialBreakdown> {
    let d = modes.d;
    let k = modes.k();
    let hbar = modes.hbar;
    if let Some(s) = twist.iter().find(|s| s.nrows() != d || s.ncols() != d) {
        return Err(Error::ShapeMismatch(format!("twist matrix is {}x{}, modes have d = {d}", s.nrows(), s.ncols())));
    }
    let preliminary = extrapotential_preliminary(scalars, hbar)?;
    let c = -hbar * hbar / 8.0;
    let dacosta = c * (2.0 * scalars.tsq - scalars.msq);
    let ambient = preliminary - dacosta;

    let mut tw = DMatrix::<C64>::zeros(k, k);
    let mut rl = DMatrix::<C64>::zeros(k, k);
    for mu in 0..d {
        for nu in 0..d {
            for s in 0..d {
                for t in 0..d {
                    let w: f64 = 0.5 * twist.iter().map(|si| si[(mu, nu)] * si[(s, t)]).sum::<f64>();
                    if w != 0.0 {
                        let var = modes.lambda2(mu, nu, s, t) - modes.lambda(mu, nu) * modes.lambda(s, t);
                        tw += var * C64::from(w);
                    }
                    if let Some(r) = riemann_normal {
                        let rv = r(mu, nu, s, t);
                        if rv != 0.0 {
                            rl += modes.lambda2(mu, nu, s, t) * C64::from(rv / 6.0);
                        }
                    }
                }
            }
        }
    }
    let raw = DMatrix::<C64>::identity(k, k) * C64::from(preliminary) + &tw + &rl;
    let hermitian_residual = (&raw - raw.adjoint()).camax();
    if hermitian_residual > HERMITIAN_TOL * raw.camax().max(hbar * hbar) {
        return Err(Error::NonHermitianResidual { residual: hermitian_residual });
    }
    let total = (&raw + raw.adjoint()) * C64::from(0.5);
    Ok(ExtrapotentialBreakdown { dacosta, ambient, twist: tw, riemann_lambda: rl, total, hermitian_residual })
}

/// Gauge matrix `A_i = S^{mu nu}_i Lambda_{mu nu}` (summed over all index
/// orders), Hermitian.
pub fn gauge_matrix(twist_i: &DMatrix<f64>, modes: &ModeSet) -> DMatrix<C64> {
    let d = modes.d;
    let k = modes.k();
    let mut a = DMatrix::<C64>::zeros(k, k);
    for mu in 0..d {
        for nu in 0..d {
            let s = twist_i[(mu, nu)];
            if s != 0.0 {
                a += modes.lambda(mu, nu) * C64::from(s);
            }
        }
    }
    (&a + a.adjoint()) * C64::from(0.5)
}
