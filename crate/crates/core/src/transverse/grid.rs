//! Finite-difference transverse modes for planar cross-sections.

use super::modes::{cluster_starts, planar_matrices, GridModes, ModeLabels, ModeSet};
use super::potential::TransversePotential;
use crate::numerics::lanczos::{lowest_eigenpairs, KrylovOptions};
use crate::numerics::sparse::{SparseHermitian, TripletBuilder};
use crate::{Error, Result, C64};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Stencil {
    #[default]
    FivePoint,
    /// Isotropic 9-point Laplacian.
    NinePoint,
    /// Fourth-order 9-point cross (two neighbours per direction); intended
    /// for smooth potentials without walls.
    WideCross,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Nodes per axis.
    pub n: usize,
    #[serde(default)]
    pub stencil: Stencil,
    /// Re-solve at half resolution and fail if the eigenvalues moved by more
    /// than 1%.
    #[serde(default)]
    pub check_resolution: bool,
}

impl GridSpec {
    pub fn new(n: usize) -> Self {
        Self { n, stencil: Stencil::FivePoint, check_resolution: false }
    }

    pub fn with_stencil(mut self, stencil: Stencil) -> Self {
        self.stencil = stencil;
        self
    }
}

/// Discretized transverse Hamiltonian on the masked nodes.
pub struct GridOperator {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub h: f64,
    pub mask: Vec<bool>,
    /// Full-grid index to masked index.
    pub index: Vec<Option<usize>>,
    pub matrix: SparseHermitian<f64>,
}

// fraction of a link from `a` (inside) towards `b` (outside) where the wall sits
fn wall_fraction(pot: &TransversePotential, a: [f64; 2], b: [f64; 2]) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        let p = [a[0] + mid * (b[0] - a[0]), a[1] + mid * (b[1] - a[1])];
        if pot.contains(&p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).max(1e-3)
}

/// Builds `-(hbar^2/2) Laplacian + V` on a square `n x n` node grid around the
/// potential's bounding box. Walls are Dirichlet: nodes outside are dropped
/// and links crossing the wall get a symmetric ghost-value correction.
pub fn grid_operator(pot: &TransversePotential, n: usize, stencil: Stencil) -> Result<GridOperator> {
    if pot.dim() != 2 {
        return Err(Error::UnsupportedDimension(pot.dim()));
    }
    if n < 8 {
        return Err(Error::InvalidInput(format!("grid needs at least 8 nodes per axis, got {n}")));
    }
    let [(x0, x1), (y0, y1)] = pot.bounding_box();
    let side = (x1 - x0).max(y1 - y0);
    let h = side / (n + 1) as f64;
    let axis = |c: f64| -> Vec<f64> { (0..n).map(|i| c - 0.5 * (n + 1) as f64 * h + (i + 1) as f64 * h).collect() };
    let x = axis(0.5 * (x0 + x1));
    let y = axis(0.5 * (y0 + y1));
    let mut mask = vec![false; n * n];
    let mut index = vec![None; n * n];
    let mut count = 0;
    for ix in 0..n {
        for iy in 0..n {
            if pot.contains(&[x[ix], y[iy]]) {
                mask[ix * n + iy] = true;
                index[ix * n + iy] = Some(count);
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::GridTooCoarse("no grid node inside the cross-section".into()));
    }
    let hb2 = pot.hbar * pot.hbar / 2.0;
    // (dx, dy, coefficient of -Laplacian * h^2)
    let offsets: Vec<(i64, i64, f64)> = match stencil {
        Stencil::FivePoint => vec![(1, 0, -1.0), (-1, 0, -1.0), (0, 1, -1.0), (0, -1, -1.0)],
        Stencil::NinePoint => {
            let mut v = vec![];
            for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                v.push((dx, dy, -4.0 / 6.0));
            }
            for (dx, dy) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                v.push((dx, dy, -1.0 / 6.0));
            }
            v
        }
        Stencil::WideCross => {
            let mut v = vec![];
            for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                v.push((dx, dy, -16.0 / 12.0));
                v.push((2 * dx, 2 * dy, 1.0 / 12.0));
            }
            v
        }
    };
    let centre = -offsets.iter().map(|o| o.2).sum::<f64>();
    let hard = pot.is_hard_wall();
    let mut b = TripletBuilder::new(count);
    for ix in 0..n {
        for iy in 0..n {
            let Some(i) = index[ix * n + iy] else {
                continue;
            };
            let p = [x[ix], y[iy]];
            let mut diag = centre * hb2 / (h * h) + pot.value(&p);
            for &(dx, dy, c) in &offsets {
                let (jx, jy) = (ix as i64 + dx, iy as i64 + dy);
                let inside = jx >= 0 && jy >= 0 && (jx as usize) < n && (jy as usize) < n;
                let j = if inside { index[jx as usize * n + jy as usize] } else { None };
                match j {
                    Some(j) => {
                        if j > i {
                            b.push_hermitian(i, j, c * hb2 / (h * h));
                        }
                    }
                    None if hard && c < 0.0 => {
                        // linear ghost value through the wall point
                        let q = [p[0] + dx as f64 * h, p[1] + dy as f64 * h];
                        let theta = wall_fraction(pot, p, q);
                        diag += -c * (1.0 - theta) / theta * hb2 / (h * h);
                    }
                    None => {}
                }
            }
            b.push(i, i, diag);
        }
    }
    Ok(GridOperator { x, y, h, mask, index, matrix: b.build() })
}

fn solve(pot: &TransversePotential, spec: &GridSpec, count: usize) -> Result<(GridOperator, Vec<f64>, Vec<Vec<f64>>)> {
    let op = grid_operator(pot, spec.n, spec.stencil)?;
    let opts = KrylovOptions { tol: 1e-12, ..KrylovOptions::default() };
    let pairs = lowest_eigenpairs(&op.matrix, count.min(op.matrix.dim()), &opts)?;
    Ok((op, pairs.values, pairs.vectors))
}

/// Lowest eigenvalues of the grid operator.
pub fn grid_spectrum(pot: &TransversePotential, spec: &GridSpec, count: usize) -> Result<Vec<f64>> {
    Ok(solve(pot, spec, count)?.1)
}

/// Modes `first .. first + k` of the planar transverse Hamiltonian together
/// with their `Lambda` matrices. The requested range must coincide with a
/// degenerate cluster.
pub fn grid_modes(pot: &TransversePotential, spec: &GridSpec, first: usize, k: usize) -> Result<ModeSet> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    let wanted = first + k + 2;
    let (op, values, mut vectors) = solve(pot, spec, wanted)?;
    if values.len() < first + k {
        return Err(Error::GridTooCoarse(format!("only {} grid modes available", values.len())));
    }
    let starts = cluster_starts(&values);
    let mut ends: Vec<usize> = starts[1..].to_vec();
    ends.push(values.len());
    let begins_cluster = starts.contains(&first);
    // the last cluster may be cut off by the solve size, so only an interior
    // boundary certifies the end
    let ends_cluster = ends[..ends.len() - 1].contains(&(first + k));
    if !begins_cluster || !ends_cluster {
        return Err(Error::DegeneracySplit(format!(
            "modes {first}..{} cut a degenerate cluster; eigenvalues {:?}",
            first + k,
            values
        )));
    }
    if spec.check_resolution {
        let coarse = GridSpec { n: spec.n / 2, check_resolution: false, ..spec.clone() };
        let vc = grid_spectrum(pot, &coarse, first + k)?;
        for i in first..first + k {
            let shift = (vc[i] - values[i]).abs() / values[i].abs();
            if shift > 0.01 {
                return Err(Error::ResolutionInsufficient(format!(
                    "eigenvalue {i} moved by {:.3}% between {} and {} nodes",
                    100.0 * shift,
                    coarse.n,
                    spec.n
                )));
            }
        }
    }
    let h2 = op.h * op.h;
    let mut chosen: Vec<Vec<f64>> = vectors.drain(first..first + k).collect();
    for v in &mut chosen {
        let norm = (h2 * v.iter().map(|c| c * c).sum::<f64>()).sqrt();
        let big = v.iter().cloned().fold(0.0f64, |a, c| if c.abs() > a.abs() { c } else { a });
        let s = if big < 0.0 { -1.0 / norm } else { 1.0 / norm };
        v.iter_mut().for_each(|c| *c *= s);
    }
    let grid = GridModes { x: op.x.clone(), y: op.y.clone(), h: op.h, mask: op.mask.clone(), vectors: chosen };
    let (lambda, lambda2) = lambda_matrices(&grid, pot.hbar);
    Ok(ModeSet {
        d: 2,
        hbar: pot.hbar,
        energies: values[first..first + k].to_vec(),
        labels: ModeLabels::Grid(grid),
        lambda,
        lambda2,
        phase_convention: "real grid modes, largest component positive".into(),
    })
}

/// Applies `A = u_1 d_2 - u_2 d_1` with fourth-order central differences and
/// zero extension outside the mask, so that `Lambda_12 = (-i hbar / 2) A` is
/// exactly Hermitian on the grid.
pub fn apply_rotation(grid: &GridModes, f: &[f64]) -> Vec<f64> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let at = |ix: i64, iy: i64| -> f64 {
        if ix < 0 || iy < 0 || ix as usize >= nx || iy as usize >= ny {
            0.0
        } else {
            f[ix as usize * ny + iy as usize]
        }
    };
    let c = 1.0 / (12.0 * grid.h);
    let mut out = vec![0.0; nx * ny];
    for ix in 0..nx {
        for iy in 0..ny {
            let k = ix * ny + iy;
            if !grid.mask[k] {
                continue;
            }
            let (i, j) = (ix as i64, iy as i64);
            let dx = c * (at(i - 2, j) - 8.0 * at(i - 1, j) + 8.0 * at(i + 1, j) - at(i + 2, j));
            let dy = c * (at(i, j - 2) - 8.0 * at(i, j - 1) + 8.0 * at(i, j + 1) - at(i, j + 2));
            out[k] = grid.x[ix] * dy - grid.y[iy] * dx;
        }
    }
    out
}

/// `Lambda_{mu nu}` and `Lambda2_{mu nu s t}` of grid modes by quadrature.
pub fn lambda_matrices(grid: &GridModes, hbar: f64) -> (Vec<DMatrix<C64>>, Vec<DMatrix<C64>>) {
    let k = grid.vectors.len();
    let h2 = grid.h * grid.h;
    let full: Vec<Vec<f64>> = (0..k).map(|m| grid.full(m)).collect();
    let rotated: Vec<Vec<f64>> = full.iter().map(|f| apply_rotation(grid, f)).collect();
    let dot = |a: &[f64], b: &[f64]| h2 * a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    let mut l12 = DMatrix::<C64>::zeros(k, k);
    let mut l1212 = DMatrix::<C64>::zeros(k, k);
    for a in 0..k {
        for b in 0..k {
            l12[(a, b)] = C64::new(0.0, -hbar / 2.0 * dot(&full[a], &rotated[b]));
            l1212[(a, b)] = C64::new(hbar * hbar / 4.0 * dot(&rotated[a], &rotated[b]), 0.0);
        }
    }
    planar_matrices(l12, l1212)
}

/// Overlap matrix `h^2 chi_a . chi_b` of the stored modes.
pub fn grid_overlaps(grid: &GridModes) -> DMatrix<f64> {
    let k = grid.vectors.len();
    let h2 = grid.h * grid.h;
    DMatrix::from_fn(k, k, |a, b| h2 * grid.vectors[a].iter().zip(&grid.vectors[b]).map(|(p, q)| p * q).sum::<f64>())
}
