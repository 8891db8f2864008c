//! Discretized operators and their low spectra.

use crate::numerics::lanczos::{lowest_eigenpairs, KrylovOptions};
use crate::numerics::sparse::{Field, SparseHermitian};
use crate::{Error, Result, C64};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

/// Largest dimension diagonalized densely.
pub const DENSE_LIMIT: usize = 1024;

/// Residual bound (relative to the operator norm) certified for every pair.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub enum OperatorMatrix {
    Real(SparseHermitian<f64>),
    Complex(SparseHermitian<C64>),
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        match self {
            Self::Real(a) => a.dim(),
            Self::Complex(a) => a.dim(),
        }
    }

    pub fn hermiticity_residual(&self) -> f64 {
        match self {
            Self::Real(a) => a.hermiticity_residual(),
            Self::Complex(a) => a.hermiticity_residual(),
        }
    }

    pub fn norm_bound(&self) -> f64 {
        match self {
            Self::Real(a) => a.norm_bound(),
            Self::Complex(a) => a.norm_bound(),
        }
    }

    /// Stores a complex matrix as real when it has no imaginary part.
    pub fn from_complex(a: SparseHermitian<C64>) -> Self {
        let n = a.dim();
        let real = (0..n).all(|i| a.row(i).all(|(_, v)| v.im == 0.0));
        if !real {
            return Self::Complex(a);
        }
        let real = {
            let mut b = crate::numerics::sparse::TripletBuilder::new(n);
            for i in 0..n {
                for (j, v) in a.row(i) {
                    b.push(i, j, v.re);
                }
            }
            b.build()
        };
        Self::Real(real)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    /// Grid node times transverse mode index (`node * k + n`).
    NodeMode,
    /// Grid node times transverse basis function.
    NodeTransverse,
    /// Plane wave times Fock state.
    Fock,
    Other,
}

#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    pub matrix: OperatorMatrix,
    pub basis: Basis,
    /// Components per grid node.
    pub block: usize,
    pub periodic: bool,
}

impl DiscretizedOperator {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub values: Vec<f64>,
    #[serde(skip)]
    pub vectors: Option<Vec<Vec<C64>>>,
    pub method: String,
    pub iterations: usize,
    pub residuals: Vec<f64>,
}

fn dense_pairs<T: Field>(a: &SparseHermitian<T>, count: usize) -> (Vec<f64>, Vec<Vec<T>>) {
    let eig = SymmetricEigen::new(a.to_dense());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    order.truncate(count);
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order.iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect();
    (values, vectors)
}

fn residual<T: Field>(a: &SparseHermitian<T>, lambda: f64, v: &[T]) -> f64 {
    let mut y = vec![T::zero(); v.len()];
    a.matvec(v, &mut y);
    let norm: f64 = v.iter().map(|x| x.modulus_squared()).sum::<f64>().sqrt();
    y.iter().zip(v).map(|(p, q)| (*p - *q * T::from_real(lambda)).modulus_squared()).sum::<f64>().sqrt() / norm
}

fn solve_generic<T: Field>(
    a: &SparseHermitian<T>,
    count: usize,
    seed: u64,
    lift: impl Fn(T) -> C64,
) -> Result<Spectrum> {
    let n = a.dim();
    let (values, vectors, method, iterations) = if n <= DENSE_LIMIT {
        let (v, x) = dense_pairs(a, count);
        (v, x, "dense tridiagonal QR".to_string(), 0)
    } else {
        let opts = KrylovOptions { tol: 1e-11, seed, ..KrylovOptions::default() };
        let pairs = lowest_eigenpairs(a, count, &opts)?;
        (pairs.values, pairs.vectors, "shift-invert block Lanczos".to_string(), pairs.iterations)
    };
    let residuals: Vec<f64> = values.iter().zip(&vectors).map(|(l, v)| residual(a, *l, v)).collect();
    let bound = RESIDUAL_TOL * a.norm_bound().max(1.0);
    if let Some(r) = residuals.iter().cloned().find(|r| *r > bound) {
        return Err(Error::NoConvergence { iterations, residual: r });
    }
    let vectors = vectors.into_iter().map(|v| v.into_iter().map(&lift).collect()).collect();
    Ok(Spectrum { values, vectors: Some(vectors), method, iterations, residuals })
}

/// Lowest `count` eigenpairs: dense for at most [`DENSE_LIMIT`] unknowns,
/// shift-invert Lanczos otherwise.
pub fn eigensolve(op: &DiscretizedOperator, count: usize) -> Result<Spectrum> {
    eigensolve_seeded(op, count, KrylovOptions::default().seed)
}

/// [`eigensolve`] with an explicit seed for the Krylov start block.
pub fn eigensolve_seeded(op: &DiscretizedOperator, count: usize, seed: u64) -> Result<Spectrum> {
    if count == 0 || count > op.dim() {
        return Err(Error::InvalidInput(format!("requested {count} eigenvalues of a {}-dim operator", op.dim())));
    }
    match &op.matrix {
        OperatorMatrix::Real(a) => solve_generic(a, count, seed, |x| C64::new(x, 0.0)),
        OperatorMatrix::Complex(a) => solve_generic(a, count, seed, |x| x),
    }
}

/// Dense Hermitian matrix as an operator (for small problems and tests).
pub fn dense_operator(m: &DMatrix<C64>) -> DiscretizedOperator {
    DiscretizedOperator {
        matrix: OperatorMatrix::from_complex(SparseHermitian::from_dense(m)),
        basis: Basis::Other,
        block: 1,
        periodic: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal() {
        let m =
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::from(3.0), C64::from(1.0), C64::from(2.0)]));
        let s = eigensolve(&dense_operator(&m), 2).unwrap();
        assert_eq!(s.values, vec![1.0, 2.0]);
    }
}
