//! Transverse eigenproblem and generalized angular momentum matrices.
//!
//! `Lambda_{mu nu} = (u_mu pi_nu - u_nu pi_mu) / 2`; in the plane this is half
//! the usual `L_z`.

pub mod disk;
pub mod grid;
pub mod harmonic;
pub mod modes;
pub mod potential;
pub mod symmetry;

pub use disk::disk_modes;
pub use grid::{grid_modes, grid_operator, grid_spectrum, lambda_matrices, GridSpec, Stencil};
pub use harmonic::{
    harmonic_energy, harmonic_lambda_matrices, harmonic_modes, lambda2_closed_form, omega_commutator_check,
};
pub use modes::{planar_matrices, GridModes, ModeLabels, ModeSet, DEG_TOL};
pub use potential::{PotentialKind, TransversePotential};
pub use symmetry::{reflection_symmetry_report, AxisVerdict, SymmetryReport};
