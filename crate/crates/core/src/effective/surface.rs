//! Effective fields of embedded patches sampled on a tangential grid.

use super::field::{assemble_effective, Axis, EffectiveField, PointInput};
use crate::framing::twist::twist_at;
use crate::framing::FrameField;
use crate::geometry::{curvature_scalars, embedding_geometry, AmbientSpace, Embedding};
use crate::transverse::ModeSet;
use crate::{Error, Result};
use std::sync::Arc;

/// Off-diagonal metric entries above this (relative) are rejected.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

/// Samples metric, curvature scalars, twist and normal curvature of `embed`
/// on the product grid `axes` (orthogonal coordinates) and assembles the
/// effective field for `modes`.
pub fn sample_embedding_field(
    space: &AmbientSpace,
    embed: &dyn Embedding,
    frame: &dyn FrameField,
    axes: Vec<Axis>,
    modes: Arc<ModeSet>,
    fd_step: f64,
) -> Result<EffectiveField> {
    let m = embed.param_dim();
    if axes.len() != m {
        return Err(Error::ShapeMismatch(format!("{} grid axes for a {m}-dimensional patch", axes.len())));
    }
    let d = embed.ambient_dim() - m;
    if modes.d != d {
        return Err(Error::ShapeMismatch(format!("modes of codimension {} on a codimension-{d} patch", modes.d)));
    }
    let nodes: Vec<Vec<f64>> = axes.iter().map(|a| a.nodes()).collect();
    let shape: Vec<usize> = nodes.iter().map(|n| n.len()).collect();
    let total: usize = shape.iter().product();
    let mut inputs = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let mut q = vec![0.0; m];
        for a in (0..m).rev() {
            q[a] = nodes[a][rem % shape[a]];
            rem /= shape[a];
        }
        inputs.push(sample_point(space, embed, frame, &q, fd_step)?);
    }
    assemble_effective(inputs, axes, modes)
}

fn sample_point(
    space: &AmbientSpace,
    embed: &dyn Embedding,
    frame: &dyn FrameField,
    q: &[f64],
    h: f64,
) -> Result<PointInput> {
    let m = embed.param_dim();
    let normals = frame.normals(q)?;
    let geom = embedding_geometry(space, embed, q, Some(normals))?;
    let x = embed.point(q);
    let g = space.metric(x.as_slice())?;
    let jac = embed.jacobian(q);
    let induced = jac.transpose() * &g * &jac;
    let mut metric = Vec::with_capacity(m);
    for i in 0..m {
        let gii = induced[(i, i)];
        if !(gii > 0.0) {
            return Err(Error::SingularMetric { point: q.to_vec() });
        }
        for j in 0..i {
            let off = induced[(i, j)].abs() / (gii * induced[(j, j)]).sqrt();
            if off > ORTHOGONALITY_TOL {
                return Err(Error::InvalidInput(format!(
                    "coordinates are not orthogonal at {q:?} (g_{j}{i} / sqrt(g_{j}{j} g_{i}{i}) = {off:e})"
                )));
            }
        }
        metric.push(gii);
    }
    let (twist, _) = twist_at(space, embed, frame, q, h)?;
    let riemann_normal = if space.is_flat() {
        None
    } else {
        let d = geom.d;
        let mut block = vec![0.0; d * d * d * d];
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for e in 0..d {
                        block[((a * d + b) * d + c) * d + e] =
                            geom.r.get(geom.nidx(a), geom.nidx(b), geom.nidx(c), geom.nidx(e));
                    }
                }
            }
        }
        Some(block)
    };
    Ok(PointInput { q: q.to_vec(), metric, scalars: curvature_scalars(&geom), twist, riemann_normal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::Boundary;
    use crate::framing::DefaultNormals;
    use crate::geometry::{Cylinder, Sphere};

    fn field(embed: Arc<dyn Embedding>, axes: Vec<Axis>) -> EffectiveField {
        let space = AmbientSpace::flat(3);
        let frame = DefaultNormals { space: space.clone(), embed: embed.clone() };
        sample_embedding_field(&space, embed.as_ref(), &frame, axes, Arc::new(ModeSet::codim_one(1.0, 1.0)), 1e-4)
            .unwrap()
    }

    #[test]
    fn cylinder_potential() {
        let rho = 0.8;
        let f = field(
            Arc::new(Cylinder { rho }),
            vec![
                Axis::new(0.0, 1.0, 5, Boundary::Dirichlet),
                Axis::new(0.0, 2.0 * std::f64::consts::PI, 8, Boundary::Periodic),
            ],
        );
        for p in &f.points {
            assert!((p.vex.total[(0, 0)].re + 1.0 / (8.0 * rho * rho)).abs() < 1e-6);
        }
        assert_eq!(f.max_gauge(), 0.0);
    }

    #[test]
    fn sphere_potential_vanishes() {
        let f = field(
            Arc::new(Sphere { rho: 1.3 }),
            vec![
                Axis::new(0.3, 2.8, 6, Boundary::Dirichlet),
                Axis::new(0.0, 2.0 * std::f64::consts::PI, 8, Boundary::Periodic),
            ],
        );
        for p in &f.points {
            assert!(p.vex.total[(0, 0)].re.abs() < 1e-6);
        }
    }
}
