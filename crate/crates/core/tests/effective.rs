use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;
use proptest::prelude::*;
use qconstrain::effective::{
    curve_field, effective_potential_nonconstant, extrapotential, gauge_matrix, rotational_invariance_check,
    sample_embedding_field, Axis, Boundary,
};
use qconstrain::framing::{DefaultNormals, ThetaProfile};
use qconstrain::geometry::curve::{Circle, CurveGeometry, Helix};
use qconstrain::geometry::{curvature_scalars, embedding_geometry, AmbientSpace, Embedding, Graph, Plane, Sphere};
use qconstrain::transverse::{disk_modes, harmonic_modes, ModeSet};
use qconstrain::{Error, C64};
use std::f64::consts::PI;
use std::sync::Arc;

fn ground(omega: [f64; 2], hbar: f64) -> Arc<ModeSet> {
    Arc::new(harmonic_modes(&omega, &[vec![0, 0]], hbar).unwrap())
}

fn graph_vex(a: f64, b: f64, hbar: f64) -> f64 {
    let g = Graph { f: Arc::new(move |x, y| a * x * x + b * y * y) };
    let s = curvature_scalars(&embedding_geometry(&AmbientSpace::flat(3), &g, &[0.0, 0.0], None).unwrap());
    let v = extrapotential(&s, &[DMatrix::zeros(1, 1), DMatrix::zeros(1, 1)], None, &ModeSet::codim_one(1.0, hbar))
        .unwrap();
    v.total[(0, 0)].re
}

#[test]
fn circle_potential() {
    for (rho, hbar) in [(1.0, 1.0), (0.5, 1.0), (2.0, 0.3)] {
        let g = CurveGeometry::from_arclength_curve(&Circle { rho }, 128, 1e-4).unwrap();
        let f = curve_field(&g, &ThetaProfile::Constant(0.0), ground([1.0, 1.5], hbar)).unwrap();
        for p in &f.points {
            assert_abs_diff_eq!(p.vex.total[(0, 0)].re, -hbar * hbar / (8.0 * rho * rho), epsilon = 1e-8);
        }
        assert_eq!(f.max_gauge(), 0.0);
    }
}

#[test]
fn surface_with_unequal_principal_curvatures() {
    // principal curvatures 1 and 1/2 at the vertex of the graph
    assert_abs_diff_eq!(graph_vex(0.5, 0.25, 1.0), -1.0 / 32.0, epsilon = 1e-8);
    assert_abs_diff_eq!(graph_vex(0.5, 0.5, 1.0), 0.0, epsilon = 1e-8);
    assert_abs_diff_eq!(graph_vex(0.0, 0.0, 1.0), 0.0, epsilon = 1e-12);
}

#[test]
fn sphere_field_is_flat_and_ungauged() {
    let space = AmbientSpace::flat(3);
    let embed: Arc<dyn Embedding> = Arc::new(Sphere { rho: 1.5 });
    let frame = DefaultNormals { space: space.clone(), embed: embed.clone() };
    let axes = vec![Axis::new(0.2, PI - 0.2, 6, Boundary::Dirichlet), Axis::new(0.0, 2.0 * PI, 8, Boundary::Periodic)];
    let f = sample_embedding_field(&space, embed.as_ref(), &frame, axes, Arc::new(ModeSet::codim_one(3.0, 1.0)), 1e-4)
        .unwrap();
    assert_eq!(f.len(), 48);
    assert_eq!(f.max_gauge(), 0.0);
    for p in &f.points {
        assert_abs_diff_eq!(p.vex.total[(0, 0)].re, 0.0, epsilon = 1e-7);
    }
}

#[test]
fn plane_field_vanishes() {
    let space = AmbientSpace::flat(3);
    let embed: Arc<dyn Embedding> = Arc::new(Plane);
    let frame = DefaultNormals { space: space.clone(), embed: embed.clone() };
    let axes = vec![Axis::new(0.0, 1.0, 4, Boundary::Dirichlet), Axis::new(0.0, 1.0, 4, Boundary::Dirichlet)];
    let f = sample_embedding_field(&space, embed.as_ref(), &frame, axes, Arc::new(ModeSet::codim_one(1.0, 1.0)), 1e-4)
        .unwrap();
    assert!(f.points.iter().all(|p| p.vex.total[(0, 0)].norm() < 1e-12));
}

#[test]
fn helix_ground_mode_closed_form() {
    // anisotropic ground state: <Lambda_12^2> = (1/8)(2 (1/4)(1 + 4)/2 - 1) = 1/32
    let g = CurveGeometry::from_arclength_curve(&Helix { radius: 3.0, pitch: 4.0, length: 20.0 }, 200, 1e-4).unwrap();
    let f = curve_field(&g, &ThetaProfile::Constant(0.0), ground([1.0, 2.0], 1.0)).unwrap();
    let (kappa, tau) = (0.12, 0.16);
    let want = -kappa * kappa / 8.0 + 2.0 * tau * tau / 32.0;
    for p in &f.points {
        assert_abs_diff_eq!(p.vex.total[(0, 0)].re, want, epsilon = 1e-8);
        assert_abs_diff_eq!(p.vex.dacosta, -kappa * kappa / 8.0, epsilon = 1e-8);
        assert!(p.vex.bookkeeping_residual() < 1e-15);
    }
    // a real nondegenerate mode carries no gauge field
    assert!(f.max_gauge() < 1e-15);
}

#[test]
fn gauge_of_a_disk_pair() {
    let modes = disk_modes(1.0, 2, 1.0).unwrap();
    let s = 0.37;
    let twist = DMatrix::from_row_slice(2, 2, &[0.0, s, -s, 0.0]);
    let a = gauge_matrix(&twist, &modes);
    assert_abs_diff_eq!(a[(0, 0)].re, 2.0 * s * 1.0, epsilon = 1e-14);
    assert_abs_diff_eq!(a[(1, 1)].re, -2.0 * s * 1.0, epsilon = 1e-14);
    assert_eq!(a[(0, 1)], C64::new(0.0, 0.0));
}

#[test]
fn adiabatic_shift_lands_on_the_diagonal() {
    let g = CurveGeometry::from_arclength_curve(&Circle { rho: 1.0 }, 64, 1e-4).unwrap();
    let f = curve_field(&g, &ThetaProfile::Constant(0.0), Arc::new(disk_modes(1.0, 1, 1.0).unwrap())).unwrap();
    let shifted = effective_potential_nonconstant(&f, |q| 0.1 * q[0].sin()).unwrap();
    for node in 0..f.len() {
        let diff = shifted.potential(node) - f.potential(node);
        let e2 = 0.1 * f.points[node].q[0].sin();
        assert_abs_diff_eq!(diff[(0, 0)].re, e2, epsilon = 1e-15);
        assert_abs_diff_eq!(diff[(1, 1)].re, e2, epsilon = 1e-15);
        assert_eq!(diff[(0, 1)], C64::new(0.0, 0.0));
    }
    assert!(matches!(effective_potential_nonconstant(&f, |_| f64::NAN), Err(Error::InvalidInput(_))));
}

#[test]
fn disk_spectrum_ignores_the_frame() {
    let g = CurveGeometry::from_arclength_curve(&Helix { radius: 3.0, pitch: 4.0, length: 20.0 }, 400, 1e-4).unwrap();
    let modes = Arc::new(disk_modes(1.0, 1, 1.0).unwrap());
    let wobble = ThetaProfile::Custom(Arc::new(|a: f64| 0.7 * (0.3 * a).sin() + 0.1 * a));
    let r = rotational_invariance_check(&g, modes, &ThetaProfile::Constant(0.0), &wobble, 4).unwrap();
    assert!(r.max_difference < 1e-8, "{:?} {:?}", r.spectrum_a, r.spectrum_b);
}

#[test]
fn frame_dependence_is_refused_for_non_casimir_modes() {
    let g = CurveGeometry::from_arclength_curve(&Circle { rho: 1.0 }, 64, 1e-4).unwrap();
    let r = rotational_invariance_check(
        &g,
        ground([1.0, 2.0], 1.0),
        &ThetaProfile::Constant(0.0),
        &ThetaProfile::Constant(1.0),
        2,
    );
    assert!(matches!(r, Err(Error::InvalidInput(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn graph_vertex_potential(a in -1.0f64..1.0, b in -1.0f64..1.0, hbar in 0.1f64..2.0) {
        let k = 2.0 * (a - b);
        prop_assert!((graph_vex(a, b, hbar) + hbar * hbar * k * k / 8.0).abs() < 1e-7);
    }

    #[test]
    fn hbar_scaling(hbar in 0.05f64..3.0, w in 0.5f64..2.5, rate in -1.0f64..1.0) {
        let g = CurveGeometry::from_arclength_curve(&Helix { radius: 1.0, pitch: 0.7, length: 6.0 }, 60, 1e-4).unwrap();
        let theta = ThetaProfile::Linear { theta0: 0.0, rate };
        let base = curve_field(&g, &theta, Arc::new(harmonic_modes(&[1.0, w], &[vec![1, 0]], 1.0).unwrap())).unwrap();
        let scaled = curve_field(&g, &theta, Arc::new(harmonic_modes(&[1.0, w], &[vec![1, 0]], hbar).unwrap())).unwrap();
        for (p, q) in base.points.iter().zip(&scaled.points) {
            let v = p.vex.total[(0, 0)].re;
            prop_assert!((q.vex.total[(0, 0)].re - hbar * hbar * v).abs() < 1e-12 * (1.0 + v.abs()) * hbar * hbar);
        }
    }
}
