//! Coordinate-reflection symmetries of a cross-section and the diagonal
//! angular momenta they force to vanish.

use super::modes::ModeSet;
use super::potential::{PotentialKind, TransversePotential};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Quadrature tolerance (in units of hbar) for a vanishing diagonal element.
pub const VANISHING_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct AxisVerdict {
    pub axis: usize,
    pub symmetric: bool,
    /// Largest |<Lambda_{axis nu}>| over modes and `nu`.
    pub max_diagonal: f64,
    /// Only meaningful for symmetric axes.
    pub vanishes: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport {
    pub axes: Vec<AxisVerdict>,
}

impl SymmetryReport {
    pub fn symmetric_axes(&self) -> Vec<usize> {
        self.axes.iter().filter(|a| a.symmetric).map(|a| a.axis).collect()
    }

    /// Every symmetric axis has vanishing diagonal elements.
    pub fn consistent(&self) -> bool {
        self.axes.iter().all(|a| !a.symmetric || a.vanishes)
    }
}

/// Whether `V(Q_axis u) = V(u)` at random sample points.
pub fn is_reflection_symmetric(pot: &TransversePotential, axis: usize, samples: usize, seed: u64) -> bool {
    let d = pot.dim();
    let half: Vec<(f64, f64)> = match &pot.kind {
        PotentialKind::Harmonic { omega } => omega
            .iter()
            .map(|w| {
                let l = 3.0 * (pot.hbar / w).sqrt();
                (-l, l)
            })
            .collect(),
        _ => pot.bounding_box().to_vec(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let u: Vec<f64> = half
            .iter()
            .map(|&(lo, hi)| {
                // widen so that both images of the box are sampled
                let r = hi.abs().max(lo.abs());
                rng.gen_range(-r..r)
            })
            .collect();
        let mut q = u.clone();
        q[axis] = -q[axis];
        let (a, b) = (pot.contains(&u), pot.contains(&q));
        if a != b {
            return false;
        }
        if a {
            let (va, vb) = (pot.value(&u), pot.value(&q));
            if (va - vb).abs() > 1e-12 * va.abs().max(vb.abs()).max(1.0) {
                return false;
            }
        }
    }
    debug_assert!(axis < d);
    true
}

pub fn reflection_symmetry_report(pot: &TransversePotential, modes: &ModeSet) -> SymmetryReport {
    let d = modes.d;
    let axes = (0..d)
        .map(|axis| {
            let symmetric = is_reflection_symmetric(pot, axis, 4000, 0x51 + axis as u64);
            let mut max_diagonal = 0.0f64;
            for nu in 0..d {
                let l = modes.lambda(axis, nu);
                for i in 0..modes.k() {
                    max_diagonal = max_diagonal.max(l[(i, i)].norm());
                }
            }
            let vanishes = max_diagonal <= VANISHING_TOL * modes.hbar;
            AxisVerdict { axis, symmetric, max_diagonal, vanishes }
        })
        .collect();
    SymmetryReport { axes }
}
