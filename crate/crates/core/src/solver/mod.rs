//! Discretization and diagonalization of the constrained Hamiltonian, and the
//! full-dimensional reference solves it is checked against.

pub mod convergence;
pub mod eigen;
pub mod strip;
pub mod tangential;
pub mod twisted;
pub mod vielbein;

pub use convergence::{epsilon_convergence, fit_order, ConvergenceReport, ConvergenceRow};
pub use eigen::{
    dense_operator, eigensolve, eigensolve_seeded, Basis, DiscretizedOperator, OperatorMatrix, Spectrum, DENSE_LIMIT,
};
pub use strip::{ambient_oracle_2d, check_tubular, strip_operator, strip_transverse_energy, StripGrid};
pub use tangential::{discretize_tangential, link_unitary};
pub use twisted::{ambient_oracle_3d_twisted, fock_basis, twisted_block, twisted_ground_level};
pub use vielbein::{fourier_d1, vielbein_kinetic_check, VielbeinCheck};
