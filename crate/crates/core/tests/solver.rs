use approx::assert_abs_diff_eq;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use qconstrain::effective::{
    assemble_effective, curve_field, effective_potential_nonconstant, Axis, Boundary, PointInput,
};
use qconstrain::framing::ThetaProfile;
use qconstrain::geometry::curve::{CurveGeometry, Linear, Vec3};
use qconstrain::geometry::CurvatureScalars;
use qconstrain::solver::{
    ambient_oracle_2d, ambient_oracle_3d_twisted, dense_operator, discretize_tangential, eigensolve, eigensolve_seeded,
    epsilon_convergence, fit_order, link_unitary, strip_transverse_energy, twisted_ground_level,
    vielbein_kinetic_check, StripGrid,
};
use qconstrain::transverse::{disk_modes, harmonic_energy, planar_matrices, ModeLabels, ModeSet, TransversePotential};
use qconstrain::{Error, C64};
use std::f64::consts::PI;
use std::sync::Arc;

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

// Ring or box of `n` nodes with a constant codimension-2 twist `s` and no
// curvature.
fn flat_line(
    n: usize,
    length: f64,
    boundary: Boundary,
    s: f64,
    modes: Arc<ModeSet>,
) -> qconstrain::effective::EffectiveField {
    let axis = Axis::new(0.0, length, n, boundary);
    let d = modes.d;
    let twist = if d == 2 { DMatrix::from_row_slice(2, 2, &[0.0, s, -s, 0.0]) } else { DMatrix::zeros(d, d) };
    let inputs = axis
        .nodes()
        .into_iter()
        .map(|q| PointInput {
            q: vec![q],
            metric: vec![1.0],
            scalars: CurvatureScalars::flat_curve(0.0),
            twist: vec![twist.clone()],
            riemann_normal: None,
        })
        .collect();
    assemble_effective(inputs, vec![axis], modes).unwrap()
}

fn levels(field: &qconstrain::effective::EffectiveField, count: usize) -> Vec<f64> {
    eigensolve(&discretize_tangential(field).unwrap(), count).unwrap().values
}

#[test]
fn diagonal_matrix() {
    let m = DMatrix::from_diagonal(&DVector::from_vec(vec![C64::from(2.0), C64::from(3.0), C64::from(1.0)]));
    let s = eigensolve(&dense_operator(&m), 3).unwrap();
    for (a, b) in s.values.iter().zip([1.0, 2.0, 3.0]) {
        assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
    }
    assert!(matches!(eigensolve(&dense_operator(&m), 4), Err(Error::InvalidInput(_))));
}

#[test]
fn free_ring_matches_lattice_dispersion() {
    let (n, length) = (200, 3.0);
    let h = length / n as f64;
    let f = flat_line(n, length, Boundary::Periodic, 0.0, Arc::new(ModeSet::codim_one(0.0, 1.0)));
    let got = levels(&f, 5);
    let want = sorted((-2i64..=2).map(|j| (1.0 - (2.0 * PI * j as f64 / n as f64).cos()) / (h * h)).collect());
    for (a, b) in got.iter().zip(&want) {
        assert_abs_diff_eq!(*a, *b, epsilon = 1e-10);
    }
    // and the continuum rotor within the lattice error
    assert!((got[1] - 0.5 * (2.0 * PI / length).powi(2)).abs() < 1e-3);
}

#[test]
fn twisted_ring_shifts_the_momenta() {
    // A = 2 S Lambda_12 = diag(S, -S) on the m = 1 disk pair
    let (n, length, s) = (120, 2.0 * PI, 0.3);
    let h = length / n as f64;
    let f = flat_line(n, length, Boundary::Periodic, s, Arc::new(disk_modes(1.0, 1, 1.0).unwrap()));
    let got = levels(&f, 6);
    let mut want = Vec::new();
    for j in -3i64..=3 {
        for sign in [1.0, -1.0] {
            want.push((1.0 - (2.0 * PI * j as f64 / n as f64 - sign * s * h).cos()) / (h * h));
        }
    }
    let want = sorted(want);
    for (a, b) in got.iter().zip(&want) {
        assert_abs_diff_eq!(*a, *b, epsilon = 1e-9);
    }
}

#[test]
fn box_with_constant_shift() {
    let (n, length, c) = (511, 1.0, 0.75);
    let h = length / (n + 1) as f64;
    let f = flat_line(n, length, Boundary::Dirichlet, 0.0, Arc::new(ModeSet::codim_one(0.0, 1.0)));
    let f = effective_potential_nonconstant(&f, |_| c).unwrap();
    let got = levels(&f, 3);
    for (j, e) in got.iter().enumerate() {
        let lattice = (1.0 - (PI * (j + 1) as f64 / (n + 1) as f64).cos()) / (h * h) + c;
        assert_abs_diff_eq!(*e, lattice, epsilon = 1e-9);
        let continuum = 0.5 * (PI * (j + 1) as f64).powi(2) + c;
        assert!((e - continuum).abs() / continuum < 1e-3);
    }
}

#[test]
fn large_ring_uses_the_iterative_path() {
    let (n, length) = (1600, 4.0);
    let h = length / n as f64;
    let f = flat_line(n, length, Boundary::Periodic, 0.0, Arc::new(ModeSet::codim_one(0.0, 1.0)));
    let op = discretize_tangential(&f).unwrap();
    let a = eigensolve_seeded(&op, 3, 7).unwrap();
    let b = eigensolve_seeded(&op, 3, 7).unwrap();
    assert_eq!(a.values, b.values);
    assert!(a.method.contains("Lanczos"));
    let first = (1.0 - (2.0 * PI / n as f64).cos()) / (h * h);
    assert_abs_diff_eq!(a.values[0], 0.0, epsilon = 1e-9);
    assert_abs_diff_eq!(a.values[1], first, epsilon = 1e-8);
    assert_abs_diff_eq!(a.values[2], first, epsilon = 1e-8);
}

#[test]
fn link_phases_are_unitary() {
    let l = DMatrix::from_row_slice(2, 2, &[C64::from(0.4), C64::new(0.1, -0.3), C64::new(0.1, 0.3), C64::from(-0.2)]);
    let u = link_unitary(&l, 0.7);
    assert!((u.adjoint() * &u - DMatrix::<C64>::identity(2, 2)).camax() < 1e-14);
    let one = link_unitary(&DMatrix::from_element(1, 1, C64::from(0.5)), 2.0);
    assert_abs_diff_eq!(one[(0, 0)].arg(), 0.25, epsilon = 1e-15);
}

fn flat_strip_modes(width: f64) -> Arc<ModeSet> {
    let (lambda, lambda2) = planar_matrices(DMatrix::zeros(1, 1), DMatrix::zeros(1, 1));
    Arc::new(ModeSet {
        d: 2,
        hbar: 1.0,
        energies: vec![strip_transverse_energy(width, 1.0)],
        labels: ModeLabels::Analytic(vec!["sine".into()]),
        lambda,
        lambda2,
        phase_convention: "real".into(),
    })
}

#[test]
fn straight_strip_separates() {
    let line = Linear { origin: Vec3::zeros(), velocity: Vec3::x(), s1: 2.0 };
    let g = CurveGeometry::from_arclength_curve(&line, 201, 1e-4).unwrap();
    let width = 0.1;
    let full = ambient_oracle_2d(&g, width, &StripGrid::default(), 3, 1.0).unwrap();
    let eff = levels(&curve_field(&g, &ThetaProfile::Constant(0.0), flat_strip_modes(width)).unwrap(), 3);
    let e_perp = strip_transverse_energy(width, 1.0);
    for (a, b) in full.values.iter().zip(&eff) {
        assert!((a - e_perp - b).abs() < 1e-6, "{a} {b}");
    }
    assert!((full.values[0] - e_perp - 0.5 * (PI / 2.0).powi(2)).abs() < 1e-3);
}

#[test]
fn untwisted_tube_separates() {
    let pot = TransversePotential::harmonic(vec![1.0, 1.7]).unwrap();
    let length = 2.0 * PI;
    let s = ambient_oracle_3d_twisted(0.0, &pot, length, 1.0, 10, 2, 5).unwrap();
    let mut want = Vec::new();
    for j in -2i64..=2 {
        for n in [[0, 0], [1, 0], [0, 1]] {
            want.push(0.5 * (j as f64).powi(2) + harmonic_energy(&[1.0, 1.7], &n, 1.0));
        }
    }
    let want = sorted(want);
    for (a, b) in s.values.iter().zip(&want) {
        assert_abs_diff_eq!(*a, *b, epsilon = 1e-10);
    }
}

#[test]
fn isotropic_tube_ground_ignores_twist() {
    for s0 in [0.0, 0.2, 0.9] {
        assert_abs_diff_eq!(twisted_ground_level(s0, &[1.3, 1.3], 1.0, 8), 1.3, epsilon = 1e-12);
    }
    // anisotropic sections feel the twist
    assert!(twisted_ground_level(0.5, &[1.0, 2.0], 1.0, 12) > 1.5 + 1e-3);
}

#[test]
fn convergence_fit_of_a_power_law() {
    let eps = [0.4, 0.2, 0.1, 0.05];
    let r = epsilon_convergence(|e| Ok((3.0 + 1.0 / (e * e) + 0.7 * e * e, 1.0 / (e * e))), &eps, 3.0, 1e-12).unwrap();
    assert!(r.monotone());
    assert_abs_diff_eq!(r.order.unwrap(), 2.0, epsilon = 1e-10);
    let exact = epsilon_convergence(|e| Ok((1.0 + e, e)), &eps, 1.0, 1e-12).unwrap();
    assert!(exact.order.is_none());
    assert!(matches!(epsilon_convergence(|e| Ok((e, e)), &eps[..2], 0.0, 1e-12), Err(Error::InvalidInput(_))));
    assert!(matches!(epsilon_convergence(|e| Ok((e, e)), &[0.1, 0.2, 0.05], 0.0, 1e-12), Err(Error::InvalidInput(_))));
}

#[test]
fn flat_metric_needs_no_correction() {
    let c = vielbein_kinetic_check(|_| 1.0, 2.0 * PI, 64, 5, 1.0);
    assert_eq!(c.max_vs, 0.0);
    assert!(c.max_difference < 1e-12);
    for (e, j) in c.direct.iter().zip([0.0, 1.0, 1.0, 4.0, 4.0]) {
        assert_abs_diff_eq!(*e, 0.5 * j, epsilon = 1e-10);
    }
}

#[test]
fn curved_metric_rescaling() {
    let c = vielbein_kinetic_check(|x| (1.0 + 0.3 * x.sin()).powi(2), 2.0 * PI, 256, 10, 1.0);
    assert!(c.max_vs > 1e-2);
    assert!(c.max_difference < 1e-8, "{}", c.max_difference);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn power_law_orders(p in 0.5f64..3.0, c in 0.1f64..10.0) {
        let x = [1.0f64, 0.5, 0.25, 0.125];
        let y: Vec<f64> = x.iter().map(|v| c * v.powf(p)).collect();
        prop_assert!((fit_order(&x, &y).unwrap() - p).abs() < 1e-10);
    }

    #[test]
    fn ring_spectrum_is_flux_periodic(s in -1.0f64..1.0) {
        // shifting the twist by one lattice quantum 2 pi / L leaves the levels unchanged
        let (n, length) = (40, 2.0 * PI);
        let a = levels(&flat_line(n, length, Boundary::Periodic, s, Arc::new(disk_modes(1.0, 1, 1.0).unwrap())), 4);
        let b = levels(&flat_line(n, length, Boundary::Periodic, s + 1.0, Arc::new(disk_modes(1.0, 1, 1.0).unwrap())), 4);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }
}
