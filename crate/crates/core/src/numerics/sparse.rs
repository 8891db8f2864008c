//! Compressed-row Hermitian matrices, reverse Cuthill-McKee ordering and a
//! banded Cholesky factorization used for shift-invert solves.

use nalgebra::{ComplexField, DMatrix};
use std::collections::VecDeque;

/// Scalar types the sparse machinery works with (`f64` and `Complex64`).
pub trait Field: ComplexField<RealField = f64> + Copy {}
impl<T: ComplexField<RealField = f64> + Copy> Field for T {}

/// Triplet accumulator; duplicate entries are summed on `build`.
#[derive(Debug, Clone)]
pub struct TripletBuilder<T> {
    n: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Field> TripletBuilder<T> {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn push(&mut self, i: usize, j: usize, v: T) {
        debug_assert!(i < self.n && j < self.n);
        self.entries.push((i, j, v));
    }

    /// Adds `v` at (i, j) and its conjugate at (j, i).
    pub fn push_hermitian(&mut self, i: usize, j: usize, v: T) {
        if i == j {
            self.push(i, i, T::from_real(v.real()));
        } else {
            self.push(i, j, v);
            self.push(j, i, v.conjugate());
        }
    }

    pub fn build(mut self) -> SparseHermitian<T> {
        self.entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut cols: Vec<usize> = Vec::with_capacity(self.entries.len());
        let mut vals: Vec<T> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                let k = vals.len() - 1;
                vals[k] += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseHermitian { n: self.n, row_ptr, cols, vals }
    }
}

/// A Hermitian matrix in CSR form holding both triangles.
#[derive(Debug, Clone)]
pub struct SparseHermitian<T> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Field> SparseHermitian<T> {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => T::zero(),
        }
    }

    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        }
    }

    /// max |A_ij - conj(A_ji)|.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i).conjugate()).modulus());
            }
        }
        worst
    }

    /// Averages the matrix with its conjugate transpose.
    pub fn symmetrized(&self) -> Self {
        let mut b = TripletBuilder::new(self.n);
        let half = T::from_real(0.5);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                b.push(i, j, v * half);
                b.push(j, i, v.conjugate() * half);
            }
        }
        b.build()
    }

    /// Upper bound on the spectral norm (max absolute row sum).
    pub fn norm_bound(&self) -> f64 {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v.modulus()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.n {
            let mut d = 0.0;
            let mut r = 0.0;
            for (j, v) in self.row(i) {
                if j == i {
                    d = v.real();
                } else {
                    r += v.modulus();
                }
            }
            lo = lo.min(d - r);
            hi = hi.max(d + r);
        }
        (lo, hi)
    }

    pub fn min_diagonal(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i).real()).fold(f64::INFINITY, f64::min)
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn from_dense(m: &DMatrix<T>) -> Self {
        let mut b = TripletBuilder::new(m.nrows());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != T::zero() {
                    b.push(i, j, m[(i, j)]);
                }
            }
        }
        b.build()
    }

    /// Half bandwidth under the permutation `perm` (new index -> old index).
    pub fn bandwidth(&self, perm: &[usize]) -> usize {
        let mut inv = vec![0; self.n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut bw = 0;
        for i in 0..self.n {
            for (j, _) in self.row(i) {
                bw = bw.max(inv[i].abs_diff(inv[j]));
            }
        }
        bw
    }
}

/// Reverse Cuthill-McKee ordering; returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee<T: Field>(a: &SparseHermitian<T>) -> Vec<usize> {
    let n = a.dim();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).filter(|&(j, _)| j != i).count()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let seed = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| (degree[i], i)).unwrap();
        let start = pseudo_peripheral(a, seed, &degree);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = a.row(v).map(|(j, _)| j).filter(|&j| !visited[j]).collect();
            nbrs.sort_by_key(|&j| (degree[j], j));
            for j in nbrs {
                if !visited[j] {
                    visited[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    order.reverse();
    order
}

fn pseudo_peripheral<T: Field>(a: &SparseHermitian<T>, seed: usize, degree: &[usize]) -> usize {
    let mut node = seed;
    let mut ecc = 0;
    for _ in 0..8 {
        let levels = bfs_levels(a, node);
        let depth = *levels.iter().flatten().max().unwrap_or(&0);
        if depth <= ecc && ecc > 0 {
            break;
        }
        ecc = depth;
        node = (0..a.dim()).filter(|&i| levels[i] == Some(depth)).min_by_key(|&i| (degree[i], i)).unwrap();
    }
    node
}

fn bfs_levels<T: Field>(a: &SparseHermitian<T>, start: usize) -> Vec<Option<usize>> {
    let mut level = vec![None; a.dim()];
    level[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let l = level[v].unwrap();
        for (j, _) in a.row(v) {
            if level[j].is_none() {
                level[j] = Some(l + 1);
                queue.push_back(j);
            }
        }
    }
    level
}

/// Banded Cholesky factor of `P (A - sigma I) P^T = L L^H`.
#[derive(Debug, Clone)]
pub struct BandedCholesky<T> {
    n: usize,
    bw: usize,
    perm: Vec<usize>,
    // row i stores L[i][i-bw ..= i]
    l: Vec<T>,
}

impl<T: Field> BandedCholesky<T> {
    /// Returns `None` when `A - sigma I` is not numerically positive definite.
    pub fn factor(a: &SparseHermitian<T>, perm: &[usize], sigma: f64) -> Option<Self> {
        let n = a.dim();
        let bw = a.bandwidth(perm);
        let w = bw + 1;
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut l = vec![T::zero(); n * w];
        for (i, &old) in perm.iter().enumerate() {
            for (jo, v) in a.row(old) {
                let j = inv[jo];
                if j <= i {
                    l[i * w + (j + bw - i)] = v;
                }
            }
            l[i * w + bw] -= T::from_real(sigma);
        }
        let scale = a.norm_bound().max(sigma.abs()).max(f64::MIN_POSITIVE);
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let jlo = j.saturating_sub(bw).max(lo);
                let mut s = l[i * w + (j + bw - i)];
                for k in jlo..j {
                    s -= l[i * w + (k + bw - i)] * l[j * w + (k + bw - j)].conjugate();
                }
                if j == i {
                    let d = s.real();
                    if !(d > 1e-14 * scale) {
                        return None;
                    }
                    l[i * w + bw] = T::from_real(d.sqrt());
                } else {
                    l[i * w + (j + bw - i)] = s / l[j * w + bw];
                }
            }
        }
        Some(Self { n, bw, perm: perm.to_vec(), l })
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Solves `(A - sigma I) x = b`.
    pub fn solve(&self, b: &[T], x: &mut [T]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        let mut y: Vec<T> = self.perm.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.l[i * w + (k + bw - i)] * y[k];
            }
            y[i] = s / self.l[i * w + bw];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..(i + bw + 1).min(n) {
                s -= self.l[k * w + (i + bw - k)].conjugate() * y[k];
            }
            y[i] = s / self.l[i * w + bw];
        }
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
    }
}
