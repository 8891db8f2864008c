//! Curvature of the normal connection and the exterior derivative of the twist.

use super::frame::FrameField;
use super::twist::twist_in_coordinates;
use crate::geometry::embedding::{embedding_geometry, frame_coefficients, Embedding, EmbeddingGeometry};
use crate::geometry::AmbientSpace;
use crate::numerics::fd;
use crate::transverse::ModeSet;
use crate::{Error, Result, C64};
use nalgebra::DMatrix;

/// `B^N` for one ordered pair of tangent frame directions.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalCurvature {
    pub i: usize,
    pub j: usize,
    pub b: DMatrix<f64>,
}

/// `(B^N_{ij})^{mu nu} = R_{mu nu i j} + sum_k (T_{mu i k} T_{nu j k} - T_{mu j k} T_{nu i k})`
/// for every tangent pair `i < j`; empty for curves.
pub fn normal_curvature(geom: &EmbeddingGeometry) -> Vec<NormalCurvature> {
    let (m, d) = (geom.m, geom.d);
    let mut out = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let b = DMatrix::from_fn(d, d, |mu, nu| {
                let mut v = geom.r.get(geom.nidx(mu), geom.nidx(nu), i, j);
                for k in 0..m {
                    v += geom.t_at(mu, i, k) * geom.t_at(nu, j, k) - geom.t_at(mu, j, k) * geom.t_at(nu, i, k);
                }
                v
            });
            out.push(NormalCurvature { i, j, b });
        }
    }
    out
}

/// Antisymmetrized twist one-form along coordinate directions.
fn coordinate_twist(
    space: &AmbientSpace,
    embed: &dyn Embedding,
    frame: &dyn FrameField,
    p: &[f64],
    h: f64,
) -> Result<Vec<DMatrix<f64>>> {
    Ok(twist_in_coordinates(space, embed, frame, p, h)?.into_iter().map(|s| (&s - s.transpose()) * 0.5).collect())
}

/// Exterior derivative `dS(X_a, X_b)` over coordinate pairs `a < b`.
fn exterior_derivative(
    space: &AmbientSpace,
    embed: &dyn Embedding,
    frame: &dyn FrameField,
    p: &[f64],
    h_inner: f64,
    h_outer: f64,
) -> Result<Vec<((usize, usize), DMatrix<f64>)>> {
    let m = embed.param_dim();
    let d = embed.ambient_dim() - m;
    let flat = |pp: &[f64]| -> nalgebra::DVector<f64> {
        match coordinate_twist(space, embed, frame, pp, h_inner) {
            Ok(v) => nalgebra::DVector::from_iterator(
                m * d * d,
                v.iter().flat_map(|x| x.iter().copied().collect::<Vec<_>>()),
            ),
            Err(_) => nalgebra::DVector::from_element(m * d * d, f64::NAN),
        }
    };
    let derivs: Vec<nalgebra::DVector<f64>> = (0..m).map(|a| fd::partial(&flat, p, a, h_outer)).collect();
    if derivs.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
        return Err(Error::DegenerateFrame { at: p[0], reason: "frame undefined near point".into() });
    }
    let block = |v: &nalgebra::DVector<f64>, b: usize| {
        DMatrix::from_column_slice(d, d, &v.as_slice()[b * d * d..(b + 1) * d * d])
    };
    let mut out = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            out.push(((a, b), block(&derivs[a], b) - block(&derivs[b], a)));
        }
    }
    Ok(out)
}

/// `B^N` along frame pairs obtained by differentiating the normal connection:
/// `B(X, Y) = dS(X, Y) + S_X S_Y - S_Y S_X`.
pub fn normal_curvature_from_connection(
    space: &AmbientSpace,
    embed: &dyn Embedding,
    frame: &dyn FrameField,
    p: &[f64],
    h_inner: f64,
    h_outer: f64,
) -> Result<Vec<NormalCurvature>> {
    let m = embed.param_dim();
    let s = coordinate_twist(space, embed, frame, p, h_inner)?;
    let ds = exterior_derivative(space, embed, frame, p, h_inner, h_outer)?;
    let d = s[0].nrows();
    let mut coord = vec![vec![DMatrix::zeros(d, d); m]; m];
    for ((a, b), dsab) in ds {
        let bab = dsab + &s[a] * &s[b] - &s[b] * &s[a];
        coord[b][a] = -&bab;
        coord[a][b] = bab;
    }
    let tan = crate::geometry::embedding::tangent_frame(space, embed, p)?;
    let c = frame_coefficients(embed, &tan, p)?;
    let mut out = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let mut b = DMatrix::zeros(d, d);
            for a in 0..m {
                for bb in 0..m {
                    b += &coord[a][bb] * (c[(a, i)] * c[(bb, j)]);
                }
            }
            out.push(NormalCurvature { i, j, b });
        }
    }
    Ok(out)
}

/// Max-norm residual of
/// `dS(x, y) = (R_xy - T_x T_y + T_y T_x - S_x S_y + S_y S_x)` over all
/// tangent pairs, with the twist differentiated at step `h_outer`.
pub fn ds_identity_residual(
    space: &AmbientSpace,
    embed: &dyn Embedding,
    frame: &dyn FrameField,
    p: &[f64],
    h_inner: f64,
    h_outer: f64,
) -> Result<f64> {
    let m = embed.param_dim();
    if m < 2 {
        return Err(Error::UnsupportedDimension(m));
    }
    let geom = embedding_geometry(space, embed, p, Some(frame.normals(p)?))?;
    let bn = normal_curvature(&geom);
    let s = coordinate_twist(space, embed, frame, p, h_inner)?;
    let ds = exterior_derivative(space, embed, frame, p, h_inner, h_outer)?;
    // express frame-pair curvatures along coordinate pairs: X_a = sum_i Cinv[(i, a)] E_i
    let tan = crate::geometry::embedding::tangent_frame(space, embed, p)?;
    let cinv = frame_coefficients(embed, &tan, p)?
        .try_inverse()
        .ok_or_else(|| Error::DegenerateFrame { at: p[0], reason: "singular frame coefficients".into() })?;
    let d = geom.d;
    let mut frame_b = vec![vec![DMatrix::zeros(d, d); m]; m];
    for nc in &bn {
        frame_b[nc.i][nc.j] = nc.b.clone();
        frame_b[nc.j][nc.i] = -&nc.b;
    }
    let mut worst = 0.0f64;
    for ((a, b), lhs) in ds {
        let mut rhs = DMatrix::zeros(d, d);
        for i in 0..m {
            for j in 0..m {
                rhs += &frame_b[i][j] * (cinv[(i, a)] * cinv[(j, b)]);
            }
        }
        rhs -= &s[a] * &s[b] - &s[b] * &s[a];
        worst = worst.max((lhs - rhs).amax());
    }
    Ok(worst)
}

/// Curvature of the mode-projected connection for a tangent pair:
/// `B^par = dS^{mu nu} Omega_{mu nu} + S_x^{mu nu} S_y^{sigma tau} [Omega_{mu nu}, Omega_{sigma tau}]`
/// with `dS = B^N - S_x S_y + S_y S_x` and `Omega = Lambda / (-i hbar)`.
pub fn parallel_curvature(bn: &DMatrix<f64>, sx: &DMatrix<f64>, sy: &DMatrix<f64>, modes: &ModeSet) -> DMatrix<C64> {
    let d = modes.d;
    let k = modes.k();
    let ds = bn - sx * sy + sy * sx;
    let omega = |mu: usize, nu: usize| modes.omega(mu, nu);
    let mut out = DMatrix::<C64>::zeros(k, k);
    for mu in 0..d {
        for nu in 0..d {
            if ds[(mu, nu)] != 0.0 {
                out += omega(mu, nu) * C64::from(ds[(mu, nu)]);
            }
            for s in 0..d {
                for t in 0..d {
                    let w = sx[(mu, nu)] * sy[(s, t)];
                    if w != 0.0 {
                        let (a, b) = (omega(mu, nu), omega(s, t));
                        out += (&a * &b - &b * &a) * C64::from(w);
                    }
                }
            }
        }
    }
    out
}
