//! Degenerate transverse mode clusters and their angular momentum matrices.

use crate::C64;
use nalgebra::DMatrix;

/// Relative tolerance for grouping eigenvalues into a degenerate cluster.
pub const DEG_TOL: f64 = 1e-6;

/// Grid representation of transverse modes (planar cross-sections).
#[derive(Debug, Clone)]
pub struct GridModes {
    /// Node coordinates along each axis.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub h: f64,
    /// Row-major (`ix * ny + iy`) mask of nodes inside the allowed region.
    pub mask: Vec<bool>,
    /// Mode values on the masked nodes, in mask order, normalized so that
    /// `h^2 sum |chi|^2 = 1`.
    pub vectors: Vec<Vec<f64>>,
}

impl GridModes {
    pub fn nx(&self) -> usize {
        self.x.len()
    }

    pub fn ny(&self) -> usize {
        self.y.len()
    }

    /// Full-grid array of a mode (zero outside the mask).
    pub fn full(&self, mode: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.mask.len()];
        let mut k = 0;
        for (i, &inside) in self.mask.iter().enumerate() {
            if inside {
                out[i] = self.vectors[mode][k];
                k += 1;
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub enum ModeLabels {
    /// Harmonic oscillator occupation numbers.
    Occupations(Vec<Vec<usize>>),
    Grid(GridModes),
    /// Closed-form modes described in words.
    Analytic(Vec<String>),
}

/// `k` degenerate transverse modes with energy `E_perp` and the matrices
/// `Lambda_{mu nu}` and `Lambda2_{mu nu sigma tau}` restricted to them.
#[derive(Debug, Clone)]
pub struct ModeSet {
    pub d: usize,
    pub hbar: f64,
    pub energies: Vec<f64>,
    pub labels: ModeLabels,
    /// `lambda[mu * d + nu]`, each `k x k` Hermitian.
    pub lambda: Vec<DMatrix<C64>>,
    /// `lambda2[((mu * d + nu) * d + s) * d + t]`.
    pub lambda2: Vec<DMatrix<C64>>,
    /// Convention used to fix the phases of degenerate modes.
    pub phase_convention: String,
}

impl ModeSet {
    /// A single nondegenerate mode of a codimension-1 constraint, on which
    /// every angular momentum component vanishes.
    pub fn codim_one(energy: f64, hbar: f64) -> Self {
        let z = DMatrix::<C64>::zeros(1, 1);
        Self {
            d: 1,
            hbar,
            energies: vec![energy],
            labels: ModeLabels::Analytic(vec!["ground".into()]),
            lambda: vec![z.clone()],
            lambda2: vec![z],
            phase_convention: "real".into(),
        }
    }

    pub fn k(&self) -> usize {
        self.energies.len()
    }

    /// Cluster energy (mean of the member energies).
    pub fn energy(&self) -> f64 {
        self.energies.iter().sum::<f64>() / self.energies.len() as f64
    }

    pub fn lambda(&self, mu: usize, nu: usize) -> &DMatrix<C64> {
        &self.lambda[mu * self.d + nu]
    }

    pub fn lambda2(&self, mu: usize, nu: usize, s: usize, t: usize) -> &DMatrix<C64> {
        &self.lambda2[((mu * self.d + nu) * self.d + s) * self.d + t]
    }

    /// `Omega_{mu nu} = Lambda_{mu nu} / (-i hbar)`.
    pub fn omega(&self, mu: usize, nu: usize) -> DMatrix<C64> {
        self.lambda(mu, nu) * C64::new(0.0, 1.0 / self.hbar)
    }

    /// Largest deviation from Hermiticity and antisymmetry of the `Lambda`
    /// matrices and the index antisymmetries of `Lambda2`.
    pub fn structure_residual(&self) -> f64 {
        let d = self.d;
        let mut worst = 0.0f64;
        for mu in 0..d {
            for nu in 0..d {
                let l = self.lambda(mu, nu);
                worst = worst.max((l - l.adjoint()).camax());
                worst = worst.max((l + self.lambda(nu, mu)).camax());
                for s in 0..d {
                    for t in 0..d {
                        let l2 = self.lambda2(mu, nu, s, t);
                        worst = worst.max((l2 + self.lambda2(nu, mu, s, t)).camax());
                        worst = worst.max((l2 + self.lambda2(mu, nu, t, s)).camax());
                    }
                }
            }
        }
        worst
    }

    /// Spread of the member energies relative to the cluster energy.
    pub fn degeneracy_spread(&self) -> f64 {
        let lo = self.energies.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo) / self.energy().abs().max(f64::MIN_POSITIVE)
    }

    /// Diagonal of `Lambda_{mu nu}` (real parts).
    pub fn lambda_diagonal(&self, mu: usize, nu: usize) -> Vec<f64> {
        let l = self.lambda(mu, nu);
        (0..self.k()).map(|i| l[(i, i)].re).collect()
    }

    /// `<Lambda_12^2> - <Lambda_12>^2` for each mode (codimension 2).
    pub fn lambda_variance(&self) -> Vec<f64> {
        let l = self.lambda(0, 1);
        let l2 = self.lambda2(0, 1, 0, 1);
        (0..self.k()).map(|i| l2[(i, i)].re - l[(i, i)].re.powi(2)).collect()
    }

    /// Largest |Lambda2 - Lambda Lambda| over all index combinations; zero on
    /// clusters invariant under the rotation generators.
    pub fn lambda2_minus_product(&self) -> f64 {
        let d = self.d;
        let mut worst = 0.0f64;
        for mu in 0..d {
            for nu in 0..d {
                for s in 0..d {
                    for t in 0..d {
                        let prod = self.lambda(mu, nu) * self.lambda(s, t);
                        worst = worst.max((self.lambda2(mu, nu, s, t) - prod).camax());
                    }
                }
            }
        }
        worst
    }
}

/// Codimension-2 helper: fills all `Lambda_{mu nu}` and `Lambda2` index
/// combinations from `Lambda_12` and `<Lambda_12 Lambda_12>`.
pub fn planar_matrices(l12: DMatrix<C64>, l1212: DMatrix<C64>) -> (Vec<DMatrix<C64>>, Vec<DMatrix<C64>>) {
    let k = l12.nrows();
    let z = DMatrix::<C64>::zeros(k, k);
    let sign = |mu: usize, nu: usize| -> f64 {
        match (mu, nu) {
            (0, 1) => 1.0,
            (1, 0) => -1.0,
            _ => 0.0,
        }
    };
    let mut lambda = Vec::with_capacity(4);
    for mu in 0..2 {
        for nu in 0..2 {
            let s = sign(mu, nu);
            lambda.push(if s == 0.0 { z.clone() } else { &l12 * C64::from(s) });
        }
    }
    let mut lambda2 = Vec::with_capacity(16);
    for mu in 0..2 {
        for nu in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let s = sign(mu, nu) * sign(a, b);
                    lambda2.push(if s == 0.0 { z.clone() } else { &l1212 * C64::from(s) });
                }
            }
        }
    }
    (lambda, lambda2)
}

/// Groups ascending eigenvalues into clusters of relative width `DEG_TOL`;
/// returns the start index of each cluster.
pub fn cluster_starts(values: &[f64]) -> Vec<usize> {
    let mut starts = vec![0];
    for i in 1..values.len() {
        let scale = values[i].abs().max(values[i - 1].abs()).max(f64::MIN_POSITIVE);
        if values[i] - values[i - 1] > DEG_TOL * scale {
            starts.push(i);
        }
    }
    starts
}
