//! Effective Hamiltonians for quantum systems confined to a submanifold by a
//! stiff transverse potential.
//!
//! The crate is organised along the computational pipeline:
//!
//! * [`geometry`]: Frenet data, second fundamental form, ambient curvature and
//!   the curvature scalars entering the extrapotential.
//! * [`framing`]: the potential frame, its twist tensor and the connection
//!   identities of the normal bundle.
//! * [`transverse`]: transverse eigenmodes and the generalized angular momentum
//!   matrices they induce.
//! * [`effective`]: assembly of the `k x k` constrained Hamiltonian
//!   `H = K + V_ex` (gauge potential plus extrapotential).
//! * [`solver`]: discretization of the constrained Hamiltonian, full-dimensional
//!   reference solvers and convergence studies.
//! * [`scenario`]: configuration files, the scenario runner and the identity
//!   check suite used by the command-line front end.
//!
//! Conventions used throughout: mass is 1, `hbar` is configurable, the
//! generalized angular momentum carries a factor one half
//! (`Lambda_12 = L_z / 2`), and the twist tensor is
//! `S_{mu nu i} = <E_mu, nabla_{E_i} E_nu>`.

pub mod effective;
pub mod error;
pub mod framing;
pub mod geometry;
pub mod numerics;
pub mod scenario;
pub mod solver;
pub mod transverse;

pub use error::{Error, Result};

/// Complex scalar used for Hermitian operators.
pub type C64 = num_complex::Complex64;
