//! Constrained Hamiltonian: gauge coupling and extrapotential.

pub mod extrapotential;
pub mod field;
pub mod invariance;
pub mod surface;

pub use extrapotential::{
    extrapotential, extrapotential_preliminary, gauge_matrix, ExtrapotentialBreakdown, PreliminaryForms,
};
pub use field::{
    assemble_curve, assemble_effective, curve_field, effective_potential_nonconstant, Axis, Boundary, EffectiveField,
    FieldPoint, PointInput,
};
pub use invariance::rotational_invariance_check;
pub use surface::sample_embedding_field;
