//! Numerical building blocks: finite-difference stencils, quadrature, Bessel
//! functions and the sparse Hermitian machinery behind the eigensolvers.

pub mod bessel;
pub mod fd;
pub mod lanczos;
pub mod quad;
pub mod sparse;

/// Shortest round-trip decimal form of `v`, switching to exponent notation
/// for very small or very large magnitudes.
pub fn fmt_num(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}
