//! Embedded submanifolds: adapted frames and the second fundamental form.

use super::ambient::{AmbientSpace, Riemann};
use super::curve::{frenet_data, ParametricCurve, DEFAULT_STEP};
use crate::numerics::fd;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use std::fmt;
use std::sync::Arc;

/// A coordinate patch `params in R^m -> R^N`.
pub trait Embedding: Send + Sync + fmt::Debug {
    fn param_dim(&self) -> usize;
    fn ambient_dim(&self) -> usize;
    fn point(&self, p: &[f64]) -> DVector<f64>;

    /// `N x m` matrix of coordinate tangents.
    fn jacobian(&self, p: &[f64]) -> DMatrix<f64> {
        let cols: Vec<DVector<f64>> =
            (0..self.param_dim()).map(|a| fd::partial(|q: &[f64]| self.point(q), p, a, 1e-4)).collect();
        DMatrix::from_columns(&cols)
    }

    /// A preferred orthonormal normal frame, if the family has one.
    fn normal_frame(&self, _p: &[f64]) -> Option<Vec<DVector<f64>>> {
        None
    }
}

fn v3(x: f64, y: f64, z: f64) -> DVector<f64> {
    DVector::from_vec(vec![x, y, z])
}

/// The plane z = 0 in R^3.
#[derive(Debug, Clone, Copy, Default)]
pub struct Plane;

impl Embedding for Plane {
    fn param_dim(&self) -> usize {
        2
    }
    fn ambient_dim(&self) -> usize {
        3
    }
    fn point(&self, p: &[f64]) -> DVector<f64> {
        v3(p[0], p[1], 0.0)
    }
    fn jacobian(&self, _p: &[f64]) -> DMatrix<f64> {
        DMatrix::from_columns(&[v3(1.0, 0.0, 0.0), v3(0.0, 1.0, 0.0)])
    }
}

/// Cylinder of radius `rho` about the z-axis, parameters (z, phi).
#[derive(Debug, Clone, Copy)]
pub struct Cylinder {
    pub rho: f64,
}

impl Embedding for Cylinder {
    fn param_dim(&self) -> usize {
        2
    }
    fn ambient_dim(&self) -> usize {
        3
    }
    fn point(&self, p: &[f64]) -> DVector<f64> {
        v3(self.rho * p[1].cos(), self.rho * p[1].sin(), p[0])
    }
    fn jacobian(&self, p: &[f64]) -> DMatrix<f64> {
        DMatrix::from_columns(&[v3(0.0, 0.0, 1.0), v3(-self.rho * p[1].sin(), self.rho * p[1].cos(), 0.0)])
    }
}

/// Sphere of radius `rho`, parameters (theta, phi).
#[derive(Debug, Clone, Copy)]
pub struct Sphere {
    pub rho: f64,
}

impl Embedding for Sphere {
    fn param_dim(&self) -> usize {
        2
    }
    fn ambient_dim(&self) -> usize {
        3
    }
    fn point(&self, p: &[f64]) -> DVector<f64> {
        let (t, f) = (p[0], p[1]);
        v3(self.rho * t.sin() * f.cos(), self.rho * t.sin() * f.sin(), self.rho * t.cos())
    }
    fn jacobian(&self, p: &[f64]) -> DMatrix<f64> {
        let (t, f) = (p[0], p[1]);
        let r = self.rho;
        DMatrix::from_columns(&[
            v3(r * t.cos() * f.cos(), r * t.cos() * f.sin(), -r * t.sin()),
            v3(-r * t.sin() * f.sin(), r * t.sin() * f.cos(), 0.0),
        ])
    }
}

/// Torus with center-line radius `big` and tube radius `small`, parameters
/// (u around the axis, v around the tube); v = 0 is the outer equator.
#[derive(Debug, Clone, Copy)]
pub struct Torus {
    pub big: f64,
    pub small: f64,
}

impl Embedding for Torus {
    fn param_dim(&self) -> usize {
        2
    }
    fn ambient_dim(&self) -> usize {
        3
    }
    fn point(&self, p: &[f64]) -> DVector<f64> {
        let (u, v) = (p[0], p[1]);
        let w = self.big + self.small * v.cos();
        v3(w * u.cos(), w * u.sin(), self.small * v.sin())
    }
    fn jacobian(&self, p: &[f64]) -> DMatrix<f64> {
        let (u, v) = (p[0], p[1]);
        let w = self.big + self.small * v.cos();
        let r = self.small;
        DMatrix::from_columns(&[
            v3(-w * u.sin(), w * u.cos(), 0.0),
            v3(-r * v.sin() * u.cos(), -r * v.sin() * u.sin(), r * v.cos()),
        ])
    }
}

pub type Surface2Fn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Graph `z = f(x, y)` in R^3.
#[derive(Clone)]
pub struct Graph {
    pub f: Surface2Fn,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Graph")
    }
}

impl Embedding for Graph {
    fn param_dim(&self) -> usize {
        2
    }
    fn ambient_dim(&self) -> usize {
        3
    }
    fn point(&self, p: &[f64]) -> DVector<f64> {
        v3(p[0], p[1], (self.f)(p[0], p[1]))
    }
    fn jacobian(&self, p: &[f64]) -> DMatrix<f64> {
        let h = 1e-4;
        let fx = fd::d1(|x| (self.f)(x, p[1]), p[0], h);
        let fy = fd::d1(|y| (self.f)(p[0], y), p[1], h);
        DMatrix::from_columns(&[v3(1.0, 0.0, fx), v3(0.0, 1.0, fy)])
    }
}

/// Flat torus `(a cos(u/a), a sin(u/a), b cos(v/b), b sin(v/b))` in R^4.
#[derive(Debug, Clone, Copy)]
pub struct FlatTorus4 {
    pub a: f64,
    pub b: f64,
}

impl Embedding for FlatTorus4 {
    fn param_dim(&self) -> usize {
        2
    }
    fn ambient_dim(&self) -> usize {
        4
    }
    fn point(&self, p: &[f64]) -> DVector<f64> {
        let (u, v) = (p[0] / self.a, p[1] / self.b);
        DVector::from_vec(vec![self.a * u.cos(), self.a * u.sin(), self.b * v.cos(), self.b * v.sin()])
    }
    fn jacobian(&self, p: &[f64]) -> DMatrix<f64> {
        let (u, v) = (p[0] / self.a, p[1] / self.b);
        DMatrix::from_columns(&[
            DVector::from_vec(vec![-u.sin(), u.cos(), 0.0, 0.0]),
            DVector::from_vec(vec![0.0, 0.0, -v.sin(), v.cos()]),
        ])
    }
    fn normal_frame(&self, p: &[f64]) -> Option<Vec<DVector<f64>>> {
        let (u, v) = (p[0] / self.a, p[1] / self.b);
        Some(vec![
            DVector::from_vec(vec![u.cos(), u.sin(), 0.0, 0.0]),
            DVector::from_vec(vec![0.0, 0.0, v.cos(), v.sin()]),
        ])
    }
}

/// Graph `(x, y, f1(x, y), f2(x, y))` in R^4.
#[derive(Clone)]
pub struct Graph4 {
    pub f1: Surface2Fn,
    pub f2: Surface2Fn,
}

impl fmt::Debug for Graph4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Graph4")
    }
}

impl Embedding for Graph4 {
    fn param_dim(&self) -> usize {
        2
    }
    fn ambient_dim(&self) -> usize {
        4
    }
    fn point(&self, p: &[f64]) -> DVector<f64> {
        DVector::from_vec(vec![p[0], p[1], (self.f1)(p[0], p[1]), (self.f2)(p[0], p[1])])
    }
}

/// A curve viewed as a one-dimensional embedding in R^3 with its Frenet normals.
#[derive(Debug, Clone)]
pub struct CurveEmbedding {
    pub curve: Arc<dyn ParametricCurve>,
}

impl Embedding for CurveEmbedding {
    fn param_dim(&self) -> usize {
        1
    }
    fn ambient_dim(&self) -> usize {
        3
    }
    fn point(&self, p: &[f64]) -> DVector<f64> {
        let x = self.curve.point(p[0]);
        v3(x[0], x[1], x[2])
    }
    fn normal_frame(&self, p: &[f64]) -> Option<Vec<DVector<f64>>> {
        let f = match self.curve.analytic_frenet(p[0]) {
            Some(f) => f,
            None if self.curve.is_arclength() => frenet_data(|s| self.curve.point(s), p[0], DEFAULT_STEP, None).ok()?,
            None => return None,
        };
        Some(vec![v3(f.n[0], f.n[1], f.n[2]), v3(f.b[0], f.b[1], f.b[2])])
    }
}

/// Gram-Schmidt with respect to the metric `g`; vectors falling below
/// `1e-10` of their original norm are dropped.
pub fn gram_schmidt(g: &DMatrix<f64>, vectors: &[DVector<f64>], against: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let ip = |a: &DVector<f64>, b: &DVector<f64>| a.dot(&(g * b));
    let mut basis: Vec<DVector<f64>> = against.to_vec();
    let start = basis.len();
    for v in vectors {
        let n0 = ip(v, v).sqrt();
        let mut w = v.clone();
        for _ in 0..2 {
            for e in &basis {
                w -= e * ip(e, &w);
            }
        }
        let nw = ip(&w, &w).sqrt();
        if nw > 1e-10 * n0 {
            basis.push(w / nw);
        }
    }
    basis.split_off(start)
}

/// Orthonormal tangent frame from the coordinate tangents, in parameter order.
pub fn tangent_frame(space: &AmbientSpace, embed: &dyn Embedding, p: &[f64]) -> Result<Vec<DVector<f64>>> {
    let q = embed.point(p);
    let g = space.metric(q.as_slice())?;
    let j = embed.jacobian(p);
    let cols: Vec<DVector<f64>> = j.column_iter().map(|c| c.into_owned()).collect();
    let e = gram_schmidt(&g, &cols, &[]);
    if e.len() != embed.param_dim() {
        return Err(Error::DegenerateFrame { at: p[0], reason: "coordinate tangents are linearly dependent".into() });
    }
    Ok(e)
}

/// Default normal frame: the family's own frame, the cross product for
/// surfaces in flat R^3, or Gram-Schmidt completion with the coordinate axes.
pub fn default_normal_frame(space: &AmbientSpace, embed: &dyn Embedding, p: &[f64]) -> Result<Vec<DVector<f64>>> {
    if let Some(n) = embed.normal_frame(p) {
        return Ok(n);
    }
    let tan = tangent_frame(space, embed, p)?;
    let big_n = embed.ambient_dim();
    if space.is_flat() && big_n == 3 && tan.len() == 2 {
        let a = nalgebra::Vector3::new(tan[0][0], tan[0][1], tan[0][2]);
        let b = nalgebra::Vector3::new(tan[1][0], tan[1][1], tan[1][2]);
        let c = a.cross(&b).normalize();
        return Ok(vec![v3(c[0], c[1], c[2])]);
    }
    let q = embed.point(p);
    let g = space.metric(q.as_slice())?;
    let axes: Vec<DVector<f64>> = (0..big_n)
        .map(|i| {
            let mut e = DVector::zeros(big_n);
            e[i] = 1.0;
            e
        })
        .collect();
    Ok(gram_schmidt(&g, &axes, &tan))
}

/// Everything the extrapotential needs at one point of the submanifold.
#[derive(Debug, Clone)]
pub struct EmbeddingGeometry {
    pub m: usize,
    pub d: usize,
    pub params: Vec<f64>,
    pub point: DVector<f64>,
    pub tangent_frame: Vec<DVector<f64>>,
    pub normal_frame: Vec<DVector<f64>>,
    /// `T[mu][i][j]` flattened as `(mu * m + i) * m + j`, symmetrized in (i, j).
    pub t: Vec<f64>,
    /// Largest |T_{mu ij} - T_{mu ji}| before symmetrization.
    pub t_asymmetry: f64,
    /// Ambient Riemann tensor in the combined frame: indices `0..m` are the
    /// tangent vectors, `m..m+d` the normals.
    pub r: Riemann,
}

impl EmbeddingGeometry {
    #[inline]
    pub fn t_at(&self, mu: usize, i: usize, j: usize) -> f64 {
        self.t[(mu * self.m + i) * self.m + j]
    }

    /// Frame index of normal `mu` in [`EmbeddingGeometry::r`].
    #[inline]
    pub fn nidx(&self, mu: usize) -> usize {
        self.m + mu
    }

    /// Matrix `T_i` acting on normals: `(T_i)_{mu j} = T_{mu i j}` as `d x m`.
    pub fn t_matrix(&self, i: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.d, self.m, |mu, j| self.t_at(mu, i, j))
    }
}

fn check_frames(
    space: &AmbientSpace,
    q: &[f64],
    tangents: &[DVector<f64>],
    normals: &[DVector<f64>],
    m: usize,
    big_n: usize,
) -> Result<()> {
    if tangents.len() != m || normals.len() != big_n - m {
        return Err(Error::FrameMismatch(format!(
            "expected {} tangent and {} normal vectors, got {} and {}",
            m,
            big_n - m,
            tangents.len(),
            normals.len()
        )));
    }
    let all: Vec<&DVector<f64>> = tangents.iter().chain(normals).collect();
    let g = space.metric(q)?;
    for (a, u) in all.iter().enumerate() {
        for (b, v) in all.iter().enumerate() {
            let want = if a == b { 1.0 } else { 0.0 };
            let got = u.dot(&(&g * *v));
            if (got - want).abs() > 1e-10 {
                return Err(Error::FrameMismatch(format!("frame vectors {a}, {b} have inner product {got:e}")));
            }
        }
    }
    Ok(())
}

/// Matrix `C` with `E_i = sum_a C[(a, i)] X_a`, where `X_a` are the
/// coordinate tangents.
pub fn frame_coefficients(embed: &dyn Embedding, tangents: &[DVector<f64>], p: &[f64]) -> Result<DMatrix<f64>> {
    let j = embed.jacobian(p);
    let e = DMatrix::from_columns(tangents);
    (j.transpose() * &j)
        .lu()
        .solve(&(j.transpose() * &e))
        .ok_or_else(|| Error::DegenerateFrame { at: p[0], reason: "singular Jacobian".into() })
}

/// `T_{mu ij} = <E_mu, nabla_{E_i} E_j>` at parameters `p`, with the tangent
/// frame from [`tangent_frame`] and the supplied normals. Returns the
/// symmetrized tensor and the raw asymmetry.
pub fn second_fundamental_form(
    space: &AmbientSpace,
    embed: &dyn Embedding,
    normals: &[DVector<f64>],
    p: &[f64],
) -> Result<(Vec<f64>, f64)> {
    let m = embed.param_dim();
    let big_n = embed.ambient_dim();
    let q = embed.point(p);
    let tan = tangent_frame(space, embed, p)?;
    check_frames(space, q.as_slice(), &tan, normals, m, big_n)?;
    let d = normals.len();
    let g = space.metric(q.as_slice())?;
    let coeff = frame_coefficients(embed, &tan, p)?;
    let h = space.fd_step;
    let de: Vec<Vec<DVector<f64>>> = (0..m)
        .map(|a| {
            let stacked = fd::partial(
                |pp: &[f64]| {
                    let f = tangent_frame(space, embed, pp)
                        .unwrap_or_else(|_| vec![DVector::from_element(big_n, f64::NAN); m]);
                    DVector::from_iterator(m * big_n, f.into_iter().flat_map(|v| v.iter().copied().collect::<Vec<_>>()))
                },
                p,
                a,
                h,
            );
            (0..m).map(|jj| stacked.rows(jj * big_n, big_n).into_owned()).collect()
        })
        .collect();
    let mut raw = vec![0.0; d * m * m];
    for i in 0..m {
        for jj in 0..m {
            let mut nabla = DVector::zeros(big_n);
            for a in 0..m {
                nabla += &de[a][jj] * coeff[(a, i)];
            }
            nabla += space.connection_term(q.as_slice(), &tan[i], &tan[jj])?;
            for (mu, nvec) in normals.iter().enumerate() {
                raw[(mu * m + i) * m + jj] = nvec.dot(&(&g * &nabla));
            }
        }
    }
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateFrame { at: p[0], reason: "tangent frame undefined near point".into() });
    }
    let mut t = vec![0.0; d * m * m];
    let mut asym = 0.0f64;
    for mu in 0..d {
        for i in 0..m {
            for jj in 0..m {
                let a = raw[(mu * m + i) * m + jj];
                let b = raw[(mu * m + jj) * m + i];
                asym = asym.max((a - b).abs());
                t[(mu * m + i) * m + jj] = 0.5 * (a + b);
            }
        }
    }
    Ok((t, asym))
}

/// Assembles [`EmbeddingGeometry`] at `p`; `normals` defaults to
/// [`default_normal_frame`].
pub fn embedding_geometry(
    space: &AmbientSpace,
    embed: &dyn Embedding,
    p: &[f64],
    normals: Option<Vec<DVector<f64>>>,
) -> Result<EmbeddingGeometry> {
    if space.dim() != embed.ambient_dim() {
        return Err(Error::ShapeMismatch(format!(
            "embedding targets R^{} but ambient space has dimension {}",
            embed.ambient_dim(),
            space.dim()
        )));
    }
    let normals = match normals {
        Some(n) => n,
        None => default_normal_frame(space, embed, p)?,
    };
    let (t, t_asymmetry) = second_fundamental_form(space, embed, &normals, p)?;
    let point = embed.point(p);
    let tangent_frame = tangent_frame(space, embed, p)?;
    let frame: Vec<DVector<f64>> = tangent_frame.iter().chain(&normals).cloned().collect();
    let r = space.riemann(point.as_slice())?.in_frame(&frame);
    Ok(EmbeddingGeometry {
        m: embed.param_dim(),
        d: normals.len(),
        params: p.to_vec(),
        point,
        tangent_frame,
        normal_frame: normals,
        t,
        t_asymmetry,
        r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_is_totally_geodesic() {
        let g = embedding_geometry(&AmbientSpace::flat(3), &Plane, &[0.3, 0.1], None).unwrap();
        assert!(g.t.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn cylinder_principal_curvatures() {
        let rho = 0.7;
        let g = embedding_geometry(&AmbientSpace::flat(3), &Cylinder { rho }, &[0.2, 1.1], None).unwrap();
        // axial direction is straight, azimuthal has curvature 1/rho
        assert!(g.t_at(0, 0, 0).abs() < 1e-9);
        assert!(g.t_at(0, 0, 1).abs() < 1e-9);
        assert!((g.t_at(0, 1, 1).abs() - 1.0 / rho).abs() < 1e-8);
    }

    #[test]
    fn frame_count_is_checked() {
        let space = AmbientSpace::flat(3);
        let n = vec![v3(0.0, 0.0, 1.0), v3(1.0, 0.0, 0.0)];
        assert!(matches!(second_fundamental_form(&space, &Plane, &n, &[0.0, 0.0]), Err(Error::FrameMismatch(_))));
        let skew = vec![v3(0.0, 0.6, 0.8)];
        assert!(matches!(second_fundamental_form(&space, &Plane, &skew, &[0.0, 0.0]), Err(Error::FrameMismatch(_))));
    }
}
