//! Space curves: named families, arclength reparameterization and Frenet data.

use super::spline::CubicSpline;
use crate::numerics::{fd, quad};
use crate::{Error, Result};
use nalgebra::Vector3;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

pub type Vec3 = Vector3<f64>;

/// Below this curvature the Frenet normal is replaced by a transported frame.
pub const KAPPA_MIN: f64 = 1e-8;

/// Default base step for curve finite differences.
pub const DEFAULT_STEP: f64 = 1e-4;

/// Tangent, normal and binormal with curvature and torsion at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrenetData {
    pub t: Vec3,
    pub n: Vec3,
    pub b: Vec3,
    pub kappa: f64,
    /// `None` where the Frenet frame is undefined (transported frame in use).
    pub tau: Option<f64>,
    /// True when `n`, `b` come from parallel transport rather than Frenet.
    pub transported: bool,
}

impl FrenetData {
    pub fn orthonormality_residual(&self) -> f64 {
        [
            (self.t.norm() - 1.0).abs(),
            (self.n.norm() - 1.0).abs(),
            (self.b.norm() - 1.0).abs(),
            self.t.dot(&self.n).abs(),
            self.t.dot(&self.b).abs(),
            self.n.dot(&self.b).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// A parameterized curve in R^3.
pub trait ParametricCurve: Send + Sync + fmt::Debug {
    fn point(&self, s: f64) -> Vec3;
    fn domain(&self) -> (f64, f64);
    fn closed(&self) -> bool {
        false
    }
    /// Whether `s` already measures arclength.
    fn is_arclength(&self) -> bool {
        false
    }
    /// Closed-form Frenet data, when the family has it (arclength families only).
    fn analytic_frenet(&self, _s: f64) -> Option<FrenetData> {
        None
    }
}

/// Circle of radius `rho` in the xy-plane, arclength parameterized.
#[derive(Debug, Clone, Copy)]
pub struct Circle {
    pub rho: f64,
}

impl ParametricCurve for Circle {
    fn point(&self, s: f64) -> Vec3 {
        let p = s / self.rho;
        Vec3::new(self.rho * p.cos(), self.rho * p.sin(), 0.0)
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, 2.0 * PI * self.rho)
    }
    fn closed(&self) -> bool {
        true
    }
    fn is_arclength(&self) -> bool {
        true
    }
    fn analytic_frenet(&self, s: f64) -> Option<FrenetData> {
        let p = s / self.rho;
        Some(FrenetData {
            t: Vec3::new(-p.sin(), p.cos(), 0.0),
            n: Vec3::new(-p.cos(), -p.sin(), 0.0),
            b: Vec3::z(),
            kappa: 1.0 / self.rho,
            tau: Some(0.0),
            transported: false,
        })
    }
}

/// Helix `(r cos(s/w), r sin(s/w), c s/w)` with `w = sqrt(r^2 + c^2)`.
#[derive(Debug, Clone, Copy)]
pub struct Helix {
    pub radius: f64,
    pub pitch: f64,
    pub length: f64,
}

impl Helix {
    fn w(&self) -> f64 {
        self.radius.hypot(self.pitch)
    }
}

impl ParametricCurve for Helix {
    fn point(&self, s: f64) -> Vec3 {
        let w = self.w();
        let p = s / w;
        Vec3::new(self.radius * p.cos(), self.radius * p.sin(), self.pitch * p)
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, self.length)
    }
    fn is_arclength(&self) -> bool {
        true
    }
    fn analytic_frenet(&self, s: f64) -> Option<FrenetData> {
        let w = self.w();
        let (r, c) = (self.radius, self.pitch);
        let p = s / w;
        let t = Vec3::new(-r * p.sin(), r * p.cos(), c) / w;
        let n = Vec3::new(-p.cos(), -p.sin(), 0.0);
        Some(FrenetData { t, n, b: t.cross(&n), kappa: r / (w * w), tau: Some(c / (w * w)), transported: false })
    }
}

/// Ellipse `(a cos s, b sin s, 0)`; not arclength parameterized.
#[derive(Debug, Clone, Copy)]
pub struct Ellipse {
    pub a: f64,
    pub b: f64,
}

impl ParametricCurve for Ellipse {
    fn point(&self, s: f64) -> Vec3 {
        Vec3::new(self.a * s.cos(), self.b * s.sin(), 0.0)
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, 2.0 * PI)
    }
    fn closed(&self) -> bool {
        true
    }
}

/// Straight map `origin + s * velocity` on `[0, s1]`.
#[derive(Debug, Clone, Copy)]
pub struct Linear {
    pub origin: Vec3,
    pub velocity: Vec3,
    pub s1: f64,
}

impl ParametricCurve for Linear {
    fn point(&self, s: f64) -> Vec3 {
        self.origin + self.velocity * s
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, self.s1)
    }
    fn is_arclength(&self) -> bool {
        (self.velocity.norm() - 1.0).abs() < 1e-14
    }
    fn analytic_frenet(&self, _s: f64) -> Option<FrenetData> {
        if !self.is_arclength() {
            return None;
        }
        Some(reference_frame(&self.velocity))
    }
}

/// A circular arc of radius `rho` and opening `angle` with straight leads of
/// length `lead` on both sides, lying in the xy-plane and turning left.
#[derive(Debug, Clone, Copy)]
pub struct ArcWithLeads {
    pub rho: f64,
    pub angle: f64,
    pub lead: f64,
}

impl ArcWithLeads {
    pub fn arc_length(&self) -> f64 {
        self.rho * self.angle
    }

    /// Signed curvature at arclength `s` (positive on the arc).
    pub fn signed_curvature(&self, s: f64) -> f64 {
        let sigma = s - self.lead;
        if sigma > 0.0 && sigma < self.arc_length() {
            1.0 / self.rho
        } else {
            0.0
        }
    }
}

impl ParametricCurve for ArcWithLeads {
    fn point(&self, s: f64) -> Vec3 {
        let sigma = s - self.lead;
        let l = self.arc_length();
        if sigma <= 0.0 {
            Vec3::new(sigma, 0.0, 0.0)
        } else if sigma <= l {
            let p = sigma / self.rho;
            Vec3::new(self.rho * p.sin(), self.rho * (1.0 - p.cos()), 0.0)
        } else {
            let th = self.angle;
            let end = Vec3::new(self.rho * th.sin(), self.rho * (1.0 - th.cos()), 0.0);
            end + Vec3::new(th.cos(), th.sin(), 0.0) * (sigma - l)
        }
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, 2.0 * self.lead + self.arc_length())
    }
    fn is_arclength(&self) -> bool {
        true
    }
    fn analytic_frenet(&self, s: f64) -> Option<FrenetData> {
        let sigma = s - self.lead;
        let th = (sigma / self.rho).clamp(0.0, self.angle);
        let t = Vec3::new(th.cos(), th.sin(), 0.0);
        let n = Vec3::new(-th.sin(), th.cos(), 0.0);
        let kappa = self.signed_curvature(s);
        Some(FrenetData {
            t,
            n,
            b: Vec3::z(),
            kappa,
            tau: if kappa > 0.0 { Some(0.0) } else { None },
            transported: kappa == 0.0,
        })
    }
}

/// A curve given by an arbitrary closure.
#[derive(Clone)]
pub struct FnCurve {
    pub map: Arc<dyn Fn(f64) -> Vec3 + Send + Sync>,
    pub domain: (f64, f64),
    pub closed: bool,
}

impl fmt::Debug for FnCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnCurve").field("domain", &self.domain).field("closed", &self.closed).finish()
    }
}

impl ParametricCurve for FnCurve {
    fn point(&self, s: f64) -> Vec3 {
        (self.map)(s)
    }
    fn domain(&self) -> (f64, f64) {
        self.domain
    }
    fn closed(&self) -> bool {
        self.closed
    }
}

/// Curve interpolated from an `alpha,x,y,z` sample table by cubic splines.
#[derive(Debug, Clone)]
pub struct SampledCurve {
    splines: [CubicSpline; 3],
    domain: (f64, f64),
    closed: bool,
}

impl SampledCurve {
    pub fn new(alpha: Vec<f64>, points: &[Vec3], closed: bool) -> Result<Self> {
        if alpha.len() != points.len() || alpha.len() < 4 {
            return Err(Error::InvalidInput("sample table needs at least 4 rows".into()));
        }
        let lo = alpha[0];
        let hi = *alpha.last().unwrap();
        let (splines, domain) = if closed {
            // the last row closes the loop when it repeats the first point
            let repeat = (points[0] - points[points.len() - 1]).norm() < 1e-12;
            let (a, p): (Vec<f64>, Vec<Vec3>) = if repeat {
                (alpha[..alpha.len() - 1].to_vec(), points[..points.len() - 1].to_vec())
            } else {
                (alpha.clone(), points.to_vec())
            };
            let period = if repeat {
                hi - lo
            } else {
                let n = a.len() as f64;
                (hi - lo) * n / (n - 1.0)
            };
            let make = |c: usize| CubicSpline::periodic(a.clone(), p.iter().map(|v| v[c]).collect(), period);
            ([make(0)?, make(1)?, make(2)?], (lo, lo + period))
        } else {
            let make = |c: usize| CubicSpline::natural(alpha.clone(), points.iter().map(|v| v[c]).collect());
            ([make(0)?, make(1)?, make(2)?], (lo, hi))
        };
        Ok(Self { splines, domain, closed })
    }

    /// Reads a CSV table with header `alpha,x,y,z` (lines starting with `#`
    /// are comments).
    pub fn from_csv(path: &Path, closed: bool) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Parse(format!("{}: missing column `{name}`", path.display())))
        };
        let idx = [col("alpha")?, col("x")?, col("y")?, col("z")?];
        let mut alpha = Vec::new();
        let mut pts = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            let v = |k: usize| -> Result<f64> {
                rec.get(idx[k])
                    .unwrap_or("")
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("{} row {}: {e}", path.display(), line + 2)))
            };
            alpha.push(v(0)?);
            pts.push(Vec3::new(v(1)?, v(2)?, v(3)?));
        }
        Self::new(alpha, &pts, closed)
    }
}

impl ParametricCurve for SampledCurve {
    fn point(&self, s: f64) -> Vec3 {
        Vec3::new(self.splines[0].eval(s), self.splines[1].eval(s), self.splines[2].eval(s))
    }
    fn domain(&self) -> (f64, f64) {
        self.domain
    }
    fn closed(&self) -> bool {
        self.closed
    }
}

/// Deterministic frame around `t`: the coordinate axis least aligned with `t`,
/// orthogonalized.
pub fn reference_frame(t: &Vec3) -> FrenetData {
    let axes = [Vec3::x(), Vec3::y(), Vec3::z()];
    let e = axes.iter().min_by(|a, b| a.dot(t).abs().total_cmp(&b.dot(t).abs())).unwrap();
    let n = (e - t * t.dot(e)).normalize();
    FrenetData { t: *t, n, b: t.cross(&n), kappa: 0.0, tau: None, transported: true }
}

fn derivatives<F: Fn(f64) -> Vec3>(map: &F, alpha: f64, h: f64) -> (Vec3, Vec3, Vec3) {
    (fd::d1(map, alpha, h), fd::d2(map, alpha, fd::scaled_step(h, 2)), fd::d3(map, alpha, fd::scaled_step(h, 3)))
}

/// Frenet frame, curvature and torsion of an arclength-parameterized map.
///
/// Where `kappa < KAPPA_MIN` the normal is carried over from `prior` by
/// projection onto the new normal plane and the torsion is reported as
/// undefined.
pub fn frenet_data<F: Fn(f64) -> Vec3>(map: F, alpha: f64, h: f64, prior: Option<&FrenetData>) -> Result<FrenetData> {
    let (x1, x2, x3) = derivatives(&map, alpha, h);
    let speed = x1.norm();
    if (speed - 1.0).abs() > 1e-6 {
        return Err(Error::NonUnitSpeed { alpha, speed });
    }
    let t = x1 / speed;
    let cross = x1.cross(&x2);
    let kappa = cross.norm() / speed.powi(3);
    if kappa < KAPPA_MIN {
        let prior = prior.ok_or_else(|| Error::DegenerateFrame {
            at: alpha,
            reason: format!("curvature {kappa:e} below {KAPPA_MIN:e} and no frame to transport"),
        })?;
        let n = prior.n - t * t.dot(&prior.n);
        if n.norm() < 1e-8 {
            return Err(Error::DegenerateFrame {
                at: alpha,
                reason: "transported normal is parallel to the tangent".into(),
            });
        }
        let n = n.normalize();
        return Ok(FrenetData { t, n, b: t.cross(&n), kappa, tau: None, transported: true });
    }
    let b = cross / cross.norm();
    let n = b.cross(&t);
    let tau = cross.dot(&x3) / cross.norm_squared();
    Ok(FrenetData { t, n, b, kappa, tau: Some(tau), transported: false })
}

/// One sample of a curve.
#[derive(Debug, Clone, Copy)]
pub struct CurveSample {
    pub alpha: f64,
    pub x: Vec3,
    pub frame: FrenetData,
}

/// Arclength-sampled curve with Frenet data.
#[derive(Debug, Clone)]
pub struct CurveGeometry {
    pub samples: Vec<CurveSample>,
    pub closed: bool,
    pub length: f64,
    /// Closed curve whose normal flips sign across the seam.
    pub seam_flip: bool,
}

impl CurveGeometry {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.alpha).collect()
    }

    pub fn kappas(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.frame.kappa).collect()
    }

    /// Uniform grid spacing.
    pub fn spacing(&self) -> f64 {
        if self.closed {
            self.length / self.samples.len() as f64
        } else {
            self.length / (self.samples.len() - 1) as f64
        }
    }

    /// Signed curvature of a curve in the xy-plane relative to the left normal
    /// `z x t`.
    pub fn signed_curvatures(&self) -> Vec<f64> {
        self.samples
            .iter()
            .map(|s| {
                let left = Vec3::z().cross(&s.frame.t);
                s.frame.kappa * s.frame.n.dot(&left)
            })
            .collect()
    }

    /// Samples an arclength-parameterized family; uses closed-form Frenet data
    /// when available, otherwise finite differences with step `h`.
    pub fn from_arclength_curve(curve: &dyn ParametricCurve, n: usize, h: f64) -> Result<Self> {
        if !curve.is_arclength() {
            let (s0, s1) = curve.domain();
            return arclength_reparameterize(|s| curve.point(s), s0, s1, n, curve.closed(), h);
        }
        let (s0, s1) = curve.domain();
        let length = s1 - s0;
        let closed = curve.closed();
        let alphas = grid(length, n, closed);
        if alphas.iter().all(|&a| curve.analytic_frenet(s0 + a).is_some()) {
            let samples = alphas
                .iter()
                .map(|&a| CurveSample {
                    alpha: a,
                    x: curve.point(s0 + a),
                    frame: curve.analytic_frenet(s0 + a).unwrap(),
                })
                .collect();
            let mut g = Self { samples, closed, length, seam_flip: false };
            g.seam_flip = closed && seam_flips(&g.samples);
            return Ok(g);
        }
        let map = |a: f64| curve.point(s0 + a);
        let frames = frames_along(&map, &alphas, h)?;
        let samples: Vec<CurveSample> =
            alphas.iter().zip(frames).map(|(&a, f)| CurveSample { alpha: a, x: map(a), frame: f }).collect();
        let seam_flip = closed && seam_flips(&samples);
        Ok(Self { samples, closed, length, seam_flip })
    }
}

fn grid(length: f64, n: usize, closed: bool) -> Vec<f64> {
    if closed {
        (0..n).map(|j| length * j as f64 / n as f64).collect()
    } else {
        (0..n).map(|j| length * j as f64 / (n - 1) as f64).collect()
    }
}

fn seam_flips(samples: &[CurveSample]) -> bool {
    let first = &samples[0].frame;
    let last = &samples[samples.len() - 1].frame;
    first.n.dot(&last.n) < 0.0
}

/// Frames at every `alpha`, transporting across straight stretches. Straight
/// stretches before the first curved sample are filled by transporting
/// backwards; a curve with no curved sample at all is seeded with
/// [`reference_frame`].
pub fn frames_along<F: Fn(f64) -> Vec3>(map: &F, alphas: &[f64], h: f64) -> Result<Vec<FrenetData>> {
    let raw: Vec<Result<FrenetData>> = alphas.iter().map(|&a| frenet_data(map, a, h, None)).collect();
    for r in &raw {
        if let Err(Error::NonUnitSpeed { alpha, speed }) = r {
            return Err(Error::NonUnitSpeed { alpha: *alpha, speed: *speed });
        }
    }
    let first_curved = raw.iter().position(|r| r.is_ok());
    let mut out: Vec<Option<FrenetData>> = raw.into_iter().map(|r| r.ok()).collect();
    let start = match first_curved {
        Some(i) => i,
        None => {
            let t = fd::d1(map, alphas[0], h).normalize();
            out[0] = Some(reference_frame(&t));
            0
        }
    };
    for i in (0..start).rev() {
        let prior = out[i + 1].unwrap();
        out[i] = Some(frenet_data(map, alphas[i], h, Some(&prior))?);
    }
    for i in start + 1..alphas.len() {
        if out[i].is_none() {
            let prior = out[i - 1].unwrap();
            out[i] = Some(frenet_data(map, alphas[i], h, Some(&prior))?);
        }
    }
    Ok(out.into_iter().map(|f| f.unwrap()).collect())
}

/// Arclength reparameterization of a regular curve, for frames and samples.
pub struct ArclengthMap<F> {
    map: F,
    s: Vec<f64>,
    alpha: Vec<f64>,
    h: f64,
    closed: bool,
}

impl<F: Fn(f64) -> Vec3> ArclengthMap<F> {
    pub fn new(map: F, s0: f64, s1: f64, anchors: usize, closed: bool, h: f64) -> Result<Self> {
        let anchors = anchors.max(16);
        let s: Vec<f64> = (0..=anchors).map(|j| s0 + (s1 - s0) * j as f64 / anchors as f64).collect();
        for &sj in &s {
            if fd::d1(&map, sj, h).norm() < 1e-12 {
                return Err(Error::ZeroSpeed { s: sj });
            }
        }
        let mut alpha = vec![0.0; s.len()];
        for j in 1..s.len() {
            alpha[j] = alpha[j - 1] + quad::integrate_adaptive(|x| fd::d1(&map, x, h).norm(), s[j - 1], s[j], 1e-14);
        }
        Ok(Self { map, s, alpha, h, closed })
    }

    pub fn length(&self) -> f64 {
        *self.alpha.last().unwrap()
    }

    fn speed(&self, s: f64) -> f64 {
        fd::d1(&self.map, s, self.h).norm()
    }

    /// Parameter value at arclength `a` (extrapolated linearly in the anchors
    /// beyond the ends of open curves).
    pub fn s_of_alpha(&self, a: f64) -> f64 {
        let len = self.length();
        let (a, shift) = if self.closed {
            let k = (a / len).floor();
            (a - k * len, k)
        } else {
            (a, 0.0)
        };
        let last = self.s.len() - 1;
        let k = self.alpha.partition_point(|&v| v <= a).saturating_sub(1).min(last - 1);
        let (sa, sb) = (self.s[k], self.s[k + 1]);
        let (aa, ab) = (self.alpha[k], self.alpha[k + 1]);
        let mut s = sa + (sb - sa) * (a - aa) / (ab - aa);
        let inside = a >= aa && a <= ab;
        let (mut lo, mut hi) = (sa, sb);
        for _ in 0..60 {
            let f = aa + quad::integrate_adaptive(|x| self.speed(x), sa, s, 1e-15) - a;
            if inside {
                if f > 0.0 {
                    hi = s;
                } else {
                    lo = s;
                }
            }
            let mut next = s - f / self.speed(s);
            if inside && !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - s).abs() < 1e-15 * (1.0 + s.abs()) {
                s = next;
                break;
            }
            s = next;
        }
        s + shift * (self.s[last] - self.s[0])
    }

    pub fn point(&self, a: f64) -> Vec3 {
        (self.map)(self.s_of_alpha(a))
    }
}

/// Resamples a regular curve at `n` points of equal arclength spacing and
/// computes Frenet frames there.
pub fn arclength_reparameterize<F: Fn(f64) -> Vec3>(
    map: F,
    s0: f64,
    s1: f64,
    n: usize,
    closed: bool,
    h: f64,
) -> Result<CurveGeometry> {
    if n < 16 {
        return Err(Error::InvalidInput(format!("need at least 16 samples, got {n}")));
    }
    let am = ArclengthMap::new(map, s0, s1, 4 * n, closed, h)?;
    let length = am.length();
    let alphas = grid(length, n, closed);
    let reparam = |a: f64| am.point(a);
    let frames = frames_along(&reparam, &alphas, h)?;
    let samples: Vec<CurveSample> =
        alphas.iter().zip(frames).map(|(&a, f)| CurveSample { alpha: a, x: reparam(a), frame: f }).collect();
    let seam_flip = closed && seam_flips(&samples);
    Ok(CurveGeometry { samples, closed, length, seam_flip })
}
