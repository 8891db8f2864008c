//! Potential frames: the orthonormal normal frames fixing the orientation of
//! the transverse potential along the constraint manifold.

use crate::geometry::curve::{CurveGeometry, ParametricCurve, Vec3};
use crate::geometry::embedding::{default_normal_frame, gram_schmidt, Embedding};
use crate::geometry::AmbientSpace;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use std::fmt;
use std::sync::Arc;

/// Rotation angle of the potential frame relative to a base frame, as a
/// function of arclength.
#[derive(Clone)]
pub enum ThetaProfile {
    Constant(f64),
    /// `theta0 + rate * alpha`.
    Linear {
        theta0: f64,
        rate: f64,
    },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for ThetaProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(t) => write!(f, "Constant({t})"),
            Self::Linear { theta0, rate } => {
                write!(f, "Linear {{ theta0: {theta0}, rate: {rate} }}")
            }
            Self::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl ThetaProfile {
    pub fn eval(&self, alpha: f64) -> f64 {
        match self {
            Self::Constant(t) => *t,
            Self::Linear { theta0, rate } => theta0 + rate * alpha,
            Self::Custom(f) => f(alpha),
        }
    }
}

/// Rotates the base normals `(n1, n2)` by `theta`:
/// `E1 = cos n1 + sin n2`, `E2 = -sin n1 + cos n2`.
pub fn rotate_pair(n1: &Vec3, n2: &Vec3, theta: f64) -> [Vec3; 2] {
    let (s, c) = theta.sin_cos();
    [n1 * c + n2 * s, -n1 * s + n2 * c]
}

/// Sampled potential frame along a curve in flat R^3.
#[derive(Debug, Clone)]
pub struct CurvePotentialFrame {
    pub alphas: Vec<f64>,
    pub e: Vec<[Vec3; 2]>,
    pub closed: bool,
    pub length: f64,
}

impl CurvePotentialFrame {
    /// Frame rotated by `theta(alpha)` relative to the curve's Frenet (or
    /// transported) normal and binormal.
    pub fn from_curve(curve: &CurveGeometry, theta: &ThetaProfile) -> Self {
        let e = curve.samples.iter().map(|s| rotate_pair(&s.frame.n, &s.frame.b, theta.eval(s.alpha))).collect();
        Self { alphas: curve.alphas(), e, closed: curve.closed, length: curve.length }
    }

    /// Frame from explicit sample vectors; each pair is re-orthonormalized
    /// against the curve tangent.
    pub fn from_samples(curve: &CurveGeometry, e: Vec<[Vec3; 2]>) -> Result<Self> {
        if e.len() != curve.len() {
            return Err(Error::ShapeMismatch(format!("{} frame samples for {} curve samples", e.len(), curve.len())));
        }
        let fixed = curve
            .samples
            .iter()
            .zip(e)
            .map(|(s, [a, b])| orthonormal_pair(&s.frame.t, &a, &b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { alphas: curve.alphas(), e: fixed, closed: curve.closed, length: curve.length })
    }

    /// Frame at an arbitrary arclength by spherical-linear interpolation of
    /// each frame vector between neighbouring samples, re-orthonormalized.
    pub fn interpolate(&self, alpha: f64) -> [Vec3; 2] {
        let n = self.alphas.len();
        let a =
            if self.closed { alpha.rem_euclid(self.length) } else { alpha.clamp(self.alphas[0], self.alphas[n - 1]) };
        let k = self.alphas.partition_point(|&x| x <= a).saturating_sub(1);
        let (k1, a1) = if k + 1 < n {
            (k + 1, self.alphas[k + 1])
        } else if self.closed {
            (0, self.length)
        } else {
            return self.e[n - 1];
        };
        let w = (a - self.alphas[k]) / (a1 - self.alphas[k]);
        let e1 = slerp(&self.e[k][0], &self.e[k1][0], w);
        let e2 = slerp(&self.e[k][1], &self.e[k1][1], w);
        let e2 = (e2 - e1 * e1.dot(&e2)).normalize();
        [e1, e2]
    }

    /// Applies a constant rotation `Q` in SO(2): `E'_mu = Q_{mu nu} E_nu`.
    pub fn rotated(&self, q: &DMatrix<f64>) -> Self {
        let e = self.e.iter().map(|[a, b]| [a * q[(0, 0)] + b * q[(0, 1)], a * q[(1, 0)] + b * q[(1, 1)]]).collect();
        Self { e, ..self.clone() }
    }

    pub fn orthonormality_residual(&self, curve: &CurveGeometry) -> f64 {
        self.e
            .iter()
            .zip(&curve.samples)
            .map(|([a, b], s)| {
                [
                    (a.norm() - 1.0).abs(),
                    (b.norm() - 1.0).abs(),
                    a.dot(b).abs(),
                    a.dot(&s.frame.t).abs(),
                    b.dot(&s.frame.t).abs(),
                ]
                .into_iter()
                .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

fn slerp(a: &Vec3, b: &Vec3, w: f64) -> Vec3 {
    let c = a.dot(b).clamp(-1.0, 1.0);
    let om = c.acos();
    if om < 1e-12 {
        return (a * (1.0 - w) + b * w).normalize();
    }
    (a * ((1.0 - w) * om).sin() + b * (w * om).sin()) / om.sin()
}

fn orthonormal_pair(t: &Vec3, a: &Vec3, b: &Vec3) -> Result<[Vec3; 2]> {
    let a1 = a - t * t.dot(a);
    if a1.norm() < 1e-8 {
        return Err(Error::FrameMismatch("frame vector parallel to the tangent".into()));
    }
    let a1 = a1.normalize();
    let b1 = b - t * t.dot(b) - a1 * a1.dot(b);
    if b1.norm() < 1e-8 {
        return Err(Error::FrameMismatch("frame vectors are dependent".into()));
    }
    Ok([a1, b1.normalize()])
}

/// A smooth field of orthonormal normal frames over a coordinate patch.
pub trait FrameField: Send + Sync {
    fn normals(&self, p: &[f64]) -> Result<Vec<DVector<f64>>>;
}

/// The embedding's default normal frame.
pub struct DefaultNormals {
    pub space: AmbientSpace,
    pub embed: Arc<dyn Embedding>,
}

impl FrameField for DefaultNormals {
    fn normals(&self, p: &[f64]) -> Result<Vec<DVector<f64>>> {
        default_normal_frame(&self.space, self.embed.as_ref(), p)
    }
}

/// Codimension-2 frame rotated by an angle field relative to a base frame.
pub struct RotatingNormals {
    pub base: Arc<dyn FrameField>,
    pub angle: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl FrameField for RotatingNormals {
    fn normals(&self, p: &[f64]) -> Result<Vec<DVector<f64>>> {
        let b = self.base.normals(p)?;
        if b.len() != 2 {
            return Err(Error::FrameMismatch(format!("rotation needs 2 normals, got {}", b.len())));
        }
        let (s, c) = (self.angle)(p).sin_cos();
        Ok(vec![&b[0] * c + &b[1] * s, -&b[0] * s + &b[1] * c])
    }
}

/// Base frame mixed by a constant matrix: `E'_mu = Q_{mu nu} E_nu`.
pub struct ConstantlyRotated {
    pub base: Arc<dyn FrameField>,
    pub q: DMatrix<f64>,
}

impl FrameField for ConstantlyRotated {
    fn normals(&self, p: &[f64]) -> Result<Vec<DVector<f64>>> {
        let b = self.base.normals(p)?;
        Ok((0..b.len())
            .map(|mu| {
                let mut v = DVector::zeros(b[0].len());
                for (nu, e) in b.iter().enumerate() {
                    v += e * self.q[(mu, nu)];
                }
                v
            })
            .collect())
    }
}

/// Frenet-based frame of an arclength curve rotated by `theta(alpha)`.
pub struct CurveFrameField {
    pub curve: Arc<dyn ParametricCurve>,
    pub theta: ThetaProfile,
}

impl FrameField for CurveFrameField {
    fn normals(&self, p: &[f64]) -> Result<Vec<DVector<f64>>> {
        let f = self.curve.analytic_frenet(p[0]).ok_or_else(|| Error::DegenerateFrame {
            at: p[0],
            reason: "curve family has no closed-form frame".into(),
        })?;
        let [a, b] = rotate_pair(&f.n, &f.b, self.theta.eval(p[0]));
        Ok(vec![DVector::from_column_slice(a.as_slice()), DVector::from_column_slice(b.as_slice())])
    }
}

/// Checks orthonormality of a frame field against the tangent frame at `p`.
pub fn frame_residual(space: &AmbientSpace, embed: &dyn Embedding, field: &dyn FrameField, p: &[f64]) -> Result<f64> {
    let q = embed.point(p);
    let g = space.metric(q.as_slice())?;
    let tan = crate::geometry::embedding::tangent_frame(space, embed, p)?;
    let nor = field.normals(p)?;
    let mut worst = 0.0f64;
    for (a, u) in nor.iter().enumerate() {
        for (b, v) in nor.iter().enumerate() {
            let want = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((u.dot(&(&g * v)) - want).abs());
        }
        for t in &tan {
            worst = worst.max(u.dot(&(&g * t)).abs());
        }
    }
    // a frame re-orthonormalized from itself should not move
    let again = gram_schmidt(&g, &nor, &tan);
    if again.len() != nor.len() {
        worst = worst.max(1.0);
    }
    Ok(worst)
}
