//! The potential twist tensor `S_{mu nu i} = <E_mu, nabla_{E_i} E_nu>`.

use super::frame::{CurvePotentialFrame, FrameField, ThetaProfile};
use crate::geometry::curve::CurveGeometry;
use crate::geometry::embedding::{frame_coefficients, tangent_frame, Embedding};
use crate::geometry::AmbientSpace;
use crate::numerics::{fd, quad::GaussRule};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

/// Raw antisymmetry residual above which the sampling is declared too coarse.
pub const ANTISYMMETRY_TOL: f64 = 1e-4;

/// Twist matrices per sample and tangent direction, stored antisymmetrized.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistTensor {
    pub d: usize,
    pub m: usize,
    /// `s[sample][i]` is the `d x d` matrix `S_{mu nu i}`.
    pub s: Vec<Vec<DMatrix<f64>>>,
    /// Largest |S + S^T| seen before antisymmetrization.
    pub raw_antisymmetry: f64,
}

impl TwistTensor {
    pub fn zeros(samples: usize, d: usize, m: usize) -> Self {
        Self { d, m, s: vec![vec![DMatrix::zeros(d, d); m]; samples], raw_antisymmetry: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// Codimension-2 scalar `S_i` with `S_{mu nu i} = S_i eps_{mu nu}`.
    pub fn scalar(&self, sample: usize, i: usize) -> f64 {
        assert_eq!(self.d, 2, "scalar twist needs codimension 2");
        self.s[sample][i][(0, 1)]
    }

    /// Twist of the frame `E'_mu = Q_{mu nu} E_nu` for constant `Q`.
    pub fn rotated(&self, q: &DMatrix<f64>) -> Self {
        let s = self.s.iter().map(|dirs| dirs.iter().map(|m| q * m * q.transpose()).collect()).collect();
        Self { s, ..self.clone() }
    }
}

fn antisymmetrize(m: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let sym = (m + m.transpose()).amax();
    ((m - m.transpose()) * 0.5, sym)
}

/// Raw twist matrices along the coordinate directions `X_a` at `p`.
pub fn twist_in_coordinates(
    space: &AmbientSpace,
    embed: &dyn Embedding,
    frame: &dyn FrameField,
    p: &[f64],
    h: f64,
) -> Result<Vec<DMatrix<f64>>> {
    let q = embed.point(p);
    let g = space.metric(q.as_slice())?;
    let e = frame.normals(p)?;
    let d = e.len();
    let big_n = q.len();
    let jac = embed.jacobian(p);
    let mut out = Vec::with_capacity(embed.param_dim());
    for a in 0..embed.param_dim() {
        let stacked = fd::partial(
            |pp: &[f64]| match frame.normals(pp) {
                Ok(f) => {
                    DVector::from_iterator(d * big_n, f.iter().flat_map(|v| v.iter().copied().collect::<Vec<_>>()))
                }
                Err(_) => DVector::from_element(d * big_n, f64::NAN),
            },
            p,
            a,
            h,
        );
        let xa = jac.column(a).into_owned();
        let mut s = DMatrix::zeros(d, d);
        for nu in 0..d {
            let mut nabla = stacked.rows(nu * big_n, big_n).into_owned();
            nabla += space.connection_term(q.as_slice(), &xa, &e[nu])?;
            let gn = &g * nabla;
            for mu in 0..d {
                s[(mu, nu)] = e[mu].dot(&gn);
            }
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateFrame { at: p[0], reason: "frame undefined near point".into() });
        }
        out.push(s);
    }
    Ok(out)
}

/// Antisymmetrized twist along the orthonormal tangent frame at `p`, with the
/// raw antisymmetry residual.
pub fn twist_at(
    space: &AmbientSpace,
    embed: &dyn Embedding,
    frame: &dyn FrameField,
    p: &[f64],
    h: f64,
) -> Result<(Vec<DMatrix<f64>>, f64)> {
    let coord = twist_in_coordinates(space, embed, frame, p, h)?;
    let tan = tangent_frame(space, embed, p)?;
    let c = frame_coefficients(embed, &tan, p)?;
    let mut worst = 0.0f64;
    let mut out = Vec::with_capacity(tan.len());
    for i in 0..tan.len() {
        let mut s = DMatrix::zeros(coord[0].nrows(), coord[0].ncols());
        for (a, sa) in coord.iter().enumerate() {
            s += sa * c[(a, i)];
        }
        let (anti, raw) = antisymmetrize(&s);
        worst = worst.max(raw);
        out.push(anti);
    }
    Ok((out, worst))
}

/// Twist tensor at each parameter point of `points`.
pub fn potential_twist(
    space: &AmbientSpace,
    embed: &dyn Embedding,
    frame: &dyn FrameField,
    points: &[Vec<f64>],
    h: f64,
) -> Result<TwistTensor> {
    let m = embed.param_dim();
    let d = embed.ambient_dim() - m;
    let mut s = Vec::with_capacity(points.len());
    let mut worst = 0.0f64;
    for p in points {
        let (mats, raw) = twist_at(space, embed, frame, p, h)?;
        if mats.first().map(|x| x.nrows()) != Some(d) {
            return Err(Error::FrameMismatch(format!("frame field must supply {d} normals")));
        }
        worst = worst.max(raw);
        s.push(mats);
    }
    if worst > ANTISYMMETRY_TOL {
        return Err(Error::GridTooCoarse(format!("raw twist antisymmetry residual {worst:e}")));
    }
    Ok(TwistTensor { d, m, s, raw_antisymmetry: worst })
}

fn sample_derivative(values: &[f64], h: f64, closed: bool) -> Vec<f64> {
    if closed {
        fd::periodic_d1(values, h)
    } else {
        fd::open_d1(values, h)
    }
}

/// Twist of a sampled curve frame from fourth-order differences over the
/// samples: `S = E1 . dE2/dalpha`.
pub fn curve_potential_twist(frame: &CurvePotentialFrame) -> Result<TwistTensor> {
    let n = frame.alphas.len();
    let h = if frame.closed { frame.length / n as f64 } else { frame.length / (n - 1) as f64 };
    let mut de = [[vec![0.0; n], vec![0.0; n], vec![0.0; n]], [vec![0.0; n], vec![0.0; n], vec![0.0; n]]];
    for (v, dv) in de.iter_mut().enumerate() {
        for (c, out) in dv.iter_mut().enumerate() {
            let comp: Vec<f64> = frame.e.iter().map(|e| e[v][c]).collect();
            *out = sample_derivative(&comp, h, frame.closed);
        }
    }
    let mut worst = 0.0f64;
    let mut s = Vec::with_capacity(n);
    for j in 0..n {
        let mut raw = DMatrix::zeros(2, 2);
        for mu in 0..2 {
            for nu in 0..2 {
                let dnu = nalgebra::Vector3::new(de[nu][0][j], de[nu][1][j], de[nu][2][j]);
                raw[(mu, nu)] = frame.e[j][mu].dot(&dnu);
            }
        }
        let (anti, r) = antisymmetrize(&raw);
        worst = worst.max(r);
        s.push(vec![anti]);
    }
    if worst > ANTISYMMETRY_TOL {
        return Err(Error::GridTooCoarse(format!("raw twist antisymmetry residual {worst:e}")));
    }
    Ok(TwistTensor { d: 2, m: 1, s, raw_antisymmetry: worst })
}

/// Pointwise split `-S = tau + omega` along a curve.
#[derive(Debug, Clone)]
pub struct TwistDecomposition {
    pub alpha: Vec<f64>,
    pub tau: Vec<f64>,
    pub omega: Vec<f64>,
    pub s: Vec<f64>,
    /// Unwrapped frame angle relative to the Frenet frame.
    pub theta: Vec<f64>,
    /// max |S + tau + omega|.
    pub residual: f64,
}

/// Measures the frame angle `theta` (`n . E1 = cos theta`, `n . E2 = -sin theta`),
/// its rate `omega`, the torsion and the twist.
pub fn curve_twist_decomposition(curve: &CurveGeometry, frame: &CurvePotentialFrame) -> Result<TwistDecomposition> {
    let n = curve.len();
    if frame.e.len() != n {
        return Err(Error::ShapeMismatch("frame and curve sample counts differ".into()));
    }
    let mut tau = Vec::with_capacity(n);
    let mut theta = Vec::with_capacity(n);
    for (s, e) in curve.samples.iter().zip(&frame.e) {
        let t = s.frame.tau.filter(|_| !s.frame.transported).ok_or_else(|| Error::DegenerateFrame {
            at: s.alpha,
            reason: "Frenet frame undefined (curvature below threshold)".into(),
        })?;
        tau.push(t);
        theta.push((-s.frame.n.dot(&e[1])).atan2(s.frame.n.dot(&e[0])));
    }
    for j in 1..n {
        let mut step = theta[j] - theta[j - 1];
        step -= 2.0 * PI * (step / (2.0 * PI)).round();
        if step.abs() > PI / 2.0 {
            return Err(Error::GridTooCoarse(format!(
                "frame angle jumps by {step:.3} between samples at alpha = {}",
                curve.samples[j].alpha
            )));
        }
        theta[j] = theta[j - 1] + step;
    }
    let h = curve.spacing();
    let omega = if curve.closed {
        let mut close = theta[0] - theta[n - 1];
        close -= 2.0 * PI * (close / (2.0 * PI)).round();
        let total = theta[n - 1] + close - theta[0];
        let rate = total / curve.length;
        let detrended: Vec<f64> = theta.iter().zip(curve.alphas()).map(|(t, a)| t - rate * a).collect();
        fd::periodic_d1(&detrended, h).into_iter().map(|w| w + rate).collect()
    } else {
        fd::open_d1(&theta, h)
    };
    let s: Vec<f64> = curve_potential_twist(frame)?.s.iter().map(|m| m[0][(0, 1)]).collect();
    let residual = (0..n).map(|j| (s[j] + tau[j] + omega[j]).abs()).fold(0.0, f64::max);
    Ok(TwistDecomposition { alpha: curve.alphas(), tau, omega, s, theta, residual })
}

/// Twist of the frame rotated by `theta(alpha)` from the Frenet frame,
/// `S = -tau - theta'`, per curve sample. Samples with a transported frame
/// contribute no torsion.
pub fn curve_profile_twist(curve: &CurveGeometry, theta: &ThetaProfile) -> TwistTensor {
    let h = 1e-4 * curve.length.max(1e-300);
    let s = curve
        .samples
        .iter()
        .map(|smp| {
            let tau = if smp.frame.transported { 0.0 } else { smp.frame.tau.unwrap_or(0.0) };
            let rate = fd::d1(|a| theta.eval(a), smp.alpha, h);
            let v = -tau - rate;
            vec![DMatrix::from_row_slice(2, 2, &[0.0, v, -v, 0.0])]
        })
        .collect();
    TwistTensor { d: 2, m: 1, s, raw_antisymmetry: 0.0 }
}

/// Integrals of `S = -tau - theta'` over consecutive sample links (and the
/// seam for closed curves): the angle increments are exact, the torsion is
/// integrated by the trapezoid rule.
pub fn curve_link_twist(curve: &CurveGeometry, theta: &ThetaProfile) -> Vec<DMatrix<f64>> {
    let n = curve.len();
    let tau: Vec<f64> =
        curve.samples.iter().map(|s| if s.frame.transported { 0.0 } else { s.frame.tau.unwrap_or(0.0) }).collect();
    let links = if curve.closed { n } else { n - 1 };
    (0..links)
        .map(|j| {
            let a = curve.samples[j].alpha;
            let (b, tb) = if j + 1 < n { (curve.samples[j + 1].alpha, tau[j + 1]) } else { (curve.length, tau[0]) };
            let v = -0.5 * (tau[j] + tb) * (b - a) - (theta.eval(b) - theta.eval(a));
            DMatrix::from_row_slice(2, 2, &[0.0, v, -v, 0.0])
        })
        .collect()
}

/// Twist `S = E1 . dE2/dalpha` of a curve frame field at one arclength.
pub fn curve_twist_at(field: &dyn FrameField, alpha: f64, h: f64) -> Result<f64> {
    let e = field.normals(&[alpha])?;
    let de2 = fd::d1(
        |a| field.normals(&[a]).map(|f| f[1].clone()).unwrap_or_else(|_| DVector::from_element(e[1].len(), f64::NAN)),
        alpha,
        h,
    );
    let de1 = fd::d1(
        |a| field.normals(&[a]).map(|f| f[0].clone()).unwrap_or_else(|_| DVector::from_element(e[0].len(), f64::NAN)),
        alpha,
        h,
    );
    let v = 0.5 * (e[0].dot(&de2) - e[1].dot(&de1));
    if !v.is_finite() {
        return Err(Error::DegenerateFrame { at: alpha, reason: "frame undefined near point".into() });
    }
    Ok(v)
}

/// Integrals of the twist over the links `[alpha_j, alpha_{j+1}]` of a grid
/// (and across the seam for closed curves), by Gauss-Legendre quadrature.
pub fn link_twist_integrals<F: Fn(f64) -> Result<f64>>(
    twist: F,
    alphas: &[f64],
    closed: bool,
    length: f64,
    nodes: usize,
) -> Result<Vec<f64>> {
    let rule = GaussRule::new(nodes);
    let n = alphas.len();
    let links = if closed { n } else { n - 1 };
    (0..links)
        .map(|j| {
            let a = alphas[j];
            let b = if j + 1 < n { alphas[j + 1] } else { alphas[0] + length };
            let mut acc = 0.0;
            for (x, w) in rule.points(a, b) {
                acc += w * twist(x)?;
            }
            Ok(acc)
        })
        .collect()
}
