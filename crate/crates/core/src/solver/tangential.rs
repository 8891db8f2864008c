//! Lattice discretization of `K_par + V_ex` with link variables.

use super::eigen::{Basis, DiscretizedOperator, OperatorMatrix};
use crate::effective::{Boundary, EffectiveField};
use crate::numerics::sparse::TripletBuilder;
use crate::{Error, Result, C64};
use nalgebra::{DMatrix, SymmetricEigen};

/// `exp(i L / hbar)` of a Hermitian matrix `L`.
pub fn link_unitary(l: &DMatrix<C64>, hbar: f64) -> DMatrix<C64> {
    let k = l.nrows();
    if k == 1 {
        return DMatrix::from_element(1, 1, C64::from_polar(1.0, l[(0, 0)].re / hbar));
    }
    let eig = SymmetricEigen::new(l.clone());
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| C64::from_polar(1.0, x / hbar)));
    v * phases * v.adjoint()
}

/// Builds the Hermitian matrix of `H_par` on the field's grid.
///
/// Kinetic energy is the lattice form `(hbar^2 / 2 h^2) sum |U phi_next - phi|^2`
/// weighted by `sqrt(g) g^{ii}` on each link, with `U = exp(i int A / hbar)`;
/// Dirichlet walls act as zero ghost values. For curved patches the matrix is
/// symmetrized with the measure `sqrt(g)`, which leaves eigenvalues unchanged.
pub fn discretize_tangential(field: &EffectiveField) -> Result<DiscretizedOperator> {
    let m = field.m;
    if m == 0 || m > 2 {
        return Err(Error::UnsupportedDimension(m));
    }
    let k = field.k;
    let nodes = field.len();
    let hbar = field.hbar;
    let sqrt_g: Vec<f64> = field.points.iter().map(|p| p.metric.iter().product::<f64>().sqrt()).collect();
    let cell: f64 = field.axes.iter().map(|a| a.spacing()).product();
    let weight: Vec<f64> = sqrt_g.iter().map(|s| s * cell).collect();
    let mut b = TripletBuilder::<C64>::new(nodes * k);
    for axis in 0..m {
        let h = field.axes[axis].spacing();
        let coeff = |node: usize| sqrt_g[node] / field.points[node].metric[axis];
        for node in 0..nodes {
            match field.successor(node, axis) {
                Some(next) => {
                    let c = 0.5 * (coeff(node) + coeff(next)) * cell * hbar * hbar / (2.0 * h * h);
                    let u = link_unitary(&field.links[axis][node], hbar);
                    let scale = c / (weight[node] * weight[next]).sqrt();
                    for a in 0..k {
                        b.push(node * k + a, node * k + a, C64::from(c / weight[node]));
                        b.push(next * k + a, next * k + a, C64::from(c / weight[next]));
                        for bb in 0..k {
                            let v = u[(a, bb)];
                            if v != C64::new(0.0, 0.0) {
                                b.push_hermitian(node * k + a, next * k + bb, -v * scale);
                            }
                        }
                    }
                }
                None => {
                    // wall beyond the last node
                    let c = coeff(node) * cell * hbar * hbar / (2.0 * h * h);
                    for a in 0..k {
                        b.push(node * k + a, node * k + a, C64::from(c / weight[node]));
                    }
                }
            }
            // wall before the first node
            let stride: usize = field.axes[axis + 1..].iter().map(|a| a.n).product();
            if field.axes[axis].boundary == Boundary::Dirichlet && (node / stride) % field.axes[axis].n == 0 {
                let c = coeff(node) * cell * hbar * hbar / (2.0 * h * h);
                for a in 0..k {
                    b.push(node * k + a, node * k + a, C64::from(c / weight[node]));
                }
            }
        }
    }
    for node in 0..nodes {
        let v = field.potential(node);
        for a in 0..k {
            for bb in a..k {
                b.push_hermitian(node * k + a, node * k + bb, v[(a, bb)]);
            }
        }
    }
    let matrix = b.build();
    let residual = matrix.hermiticity_residual();
    if residual > 1e-12 * matrix.norm_bound().max(1.0) {
        return Err(Error::NonHermitianResidual { residual });
    }
    Ok(DiscretizedOperator {
        matrix: OperatorMatrix::from_complex(matrix),
        basis: Basis::NodeMode,
        block: k,
        periodic: field.boundary() == Boundary::Periodic,
    })
}
