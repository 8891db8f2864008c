use approx::assert_abs_diff_eq;
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use qconstrain::transverse::{
    disk_modes, grid_modes, grid_spectrum, harmonic_energy, harmonic_modes, lambda2_closed_form,
    omega_commutator_check, reflection_symmetry_report, GridSpec, ModeSet, Stencil, TransversePotential,
};
use qconstrain::{Error, C64};
use std::f64::consts::PI;

// Normalized Hermite functions of unit frequency with their derivatives,
// from the three-term recurrence.
fn hermite_functions(n: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let mut h = vec![PI.powf(-0.25) * (-0.5 * x * x).exp()];
    h.push(2f64.sqrt() * x * h[0]);
    for k in 2..=n + 1 {
        let v = (2.0 / k as f64).sqrt() * x * h[k - 1] - ((k - 1) as f64 / k as f64).sqrt() * h[k - 2];
        h.push(v);
    }
    let dh = (0..=n)
        .map(|k| {
            let down = if k > 0 { (k as f64 / 2.0).sqrt() * h[k - 1] } else { 0.0 };
            down - ((k + 1) as f64 / 2.0).sqrt() * h[k + 1]
        })
        .collect();
    h.truncate(n + 1);
    (h, dh)
}

// <n| Lambda_12 Lambda_12 |n> as the squared norm of Lambda_12 psi,
// integrated on a uniform grid, for hbar = 1.
fn lambda_sq_quadrature(omega: [f64; 2], n: [usize; 2]) -> f64 {
    let m = 1200;
    let half = 12.0;
    let step = 2.0 * half / m as f64;
    let mode = |w: f64, k: usize, x: f64| {
        let s = w.sqrt();
        let (h, dh) = hermite_functions(k, s * x);
        (s.sqrt() * h[k], s * s.sqrt() * dh[k])
    };
    let mut acc = 0.0;
    for i in 0..=m {
        let x = -half + step * i as f64;
        let (fx, dfx) = mode(omega[0], n[0], x);
        for j in 0..=m {
            let y = -half + step * j as f64;
            let (fy, dfy) = mode(omega[1], n[1], y);
            let a = x * fx * dfy - y * dfx * fy;
            acc += 0.25 * a * a;
        }
    }
    acc * step * step
}

fn eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    // Lambda_12 of real modes is imaginary antisymmetric; i * Lambda is real symmetric
    let k = m.nrows();
    let h = DMatrix::from_fn(2 * k, 2 * k, |i, j| {
        let z = m[(i % k, j % k)];
        match (i < k, j < k) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let mut e: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    e.sort_by(|a, b| a.partial_cmp(b).unwrap());
    e.into_iter().step_by(2).collect()
}

#[test]
fn hermite_quadrature_matches_ladder_algebra() {
    for (omega, n, expect) in [([1.0, 1.0], [0, 0], 0.0), ([1.0, 1.0], [1, 0], 0.25)] {
        let q = lambda_sq_quadrature(omega, n);
        assert_abs_diff_eq!(q, expect, epsilon = 1e-8);
        let m = harmonic_modes(&omega, &[n.to_vec()], 1.0).unwrap();
        assert_abs_diff_eq!(m.lambda2(0, 1, 0, 1)[(0, 0)].re, expect, epsilon = 1e-12);
    }
    for (omega, n) in [([1.0, 2.0], [1, 2]), ([0.7, 1.9], [0, 3]), ([2.5, 1.0], [2, 1])] {
        let q = lambda_sq_quadrature(omega, n);
        let m = harmonic_modes(&omega, &[n.to_vec()], 1.0).unwrap();
        assert_abs_diff_eq!(m.lambda2(0, 1, 0, 1)[(0, 0)].re, q, epsilon = 1e-7);
        assert_abs_diff_eq!(lambda2_closed_form(&omega, &n, 0, 1, 0, 1, 1.0), q, epsilon = 1e-7);
    }
}

#[test]
fn harmonic_levels_and_degeneracy() {
    let m = harmonic_modes(&[1.0, 2.0], &[vec![2, 0], vec![0, 1]], 0.5).unwrap();
    assert_abs_diff_eq!(m.energy(), 0.5 * 3.5, epsilon = 1e-14);
    assert_abs_diff_eq!(harmonic_energy(&[1.0, 1.0, 3.0], &[0, 0, 0], 2.0), 5.0, epsilon = 1e-14);
    assert!(matches!(harmonic_modes(&[1.0, 2.0], &[vec![1, 0], vec![0, 1]], 1.0), Err(Error::NotDegenerate { .. })));
    for occ in [vec![0, 0], vec![3, 1], vec![2, 5]] {
        let m = harmonic_modes(&[1.3, 0.4], &[occ], 1.0).unwrap();
        assert_eq!(m.lambda(0, 1)[(0, 0)].norm(), 0.0);
    }
}

#[test]
fn isotropic_first_excited_pair() {
    let m = harmonic_modes(&[1.0, 1.0], &[vec![1, 0], vec![0, 1]], 1.0).unwrap();
    let e = eigenvalues(m.lambda(0, 1));
    assert_abs_diff_eq!(e[0], -0.5, epsilon = 1e-12);
    assert_abs_diff_eq!(e[1], 0.5, epsilon = 1e-12);
    assert!(m.structure_residual() < 1e-14);
    assert!(m.lambda2_minus_product() < 1e-14);
}

#[test]
fn codimension_one_has_no_angular_momentum() {
    let m = ModeSet::codim_one(2.0, 1.0);
    assert_eq!(m.d, 1);
    assert!(m.lambda.iter().chain(&m.lambda2).all(|l| l.camax() == 0.0));
}

#[test]
fn hard_wall_ground_levels() {
    let square = grid_spectrum(&TransversePotential::square(1.0).unwrap(), &GridSpec::new(96), 4).unwrap();
    for (e, want) in square.iter().zip([2.0, 5.0, 5.0, 8.0]) {
        assert!((e - 0.5 * PI * PI * want).abs() / (0.5 * PI * PI * want) < 0.01, "{e}");
    }
    let j01 = 2.404825557695773;
    let disk = grid_spectrum(&TransversePotential::disk(1.0).unwrap(), &GridSpec::new(128), 1).unwrap()[0];
    assert!((disk - 0.5 * j01 * j01).abs() / (0.5 * j01 * j01) < 0.01, "{disk}");
    assert_abs_diff_eq!(disk_modes(1.0, 0, 1.0).unwrap().energy(), 0.5 * j01 * j01, epsilon = 1e-10);
    let tri =
        grid_spectrum(&TransversePotential::equilateral_triangle(1.0).unwrap(), &GridSpec::new(128), 1).unwrap()[0];
    let want = 8.0 * PI * PI / 3.0;
    assert!((tri - want).abs() / want < 0.01, "{tri}");
}

#[test]
fn square_well_converges_at_second_order() {
    let pot = TransversePotential::square(1.0).unwrap();
    let err: Vec<f64> =
        [24, 48, 96].iter().map(|&n| (grid_spectrum(&pot, &GridSpec::new(n), 1).unwrap()[0] - PI * PI).abs()).collect();
    let order = (err[1] / err[2]).log2();
    assert!(order >= 1.8, "order {order}, errors {err:?}");
    assert!(err[0] > err[1]);
}

#[test]
fn grid_and_ladder_angular_momenta_agree() {
    let pot = TransversePotential::harmonic(vec![1.0, 1.0]).unwrap();
    let m = grid_modes(&pot, &GridSpec::new(128).with_stencil(Stencil::WideCross), 1, 2).unwrap();
    assert_abs_diff_eq!(m.energy(), 2.0, epsilon = 1e-4);
    let e = eigenvalues(m.lambda(0, 1));
    assert_abs_diff_eq!(e[0], -0.5, epsilon = 1e-4);
    assert_abs_diff_eq!(e[1], 0.5, epsilon = 1e-4);
    let tr: f64 = (0..2).map(|i| m.lambda2(0, 1, 0, 1)[(i, i)].re).sum();
    assert_abs_diff_eq!(tr, 0.5, epsilon = 1e-4);
}

#[test]
fn disk_pair_carries_plus_minus_m() {
    for m in [1usize, 2, 3] {
        let d = disk_modes(0.8, m, 1.5).unwrap();
        let l = d.lambda(0, 1);
        assert_abs_diff_eq!(l[(0, 1)].norm(), 0.0);
        assert_abs_diff_eq!(l[(0, 0)].re, 0.75 * m as f64, epsilon = 1e-14);
        assert!(d.lambda2_minus_product() < 1e-14);
    }
    let grid = grid_modes(&TransversePotential::disk(1.0).unwrap(), &GridSpec::new(128), 1, 2).unwrap();
    let e = eigenvalues(grid.lambda(0, 1));
    assert_abs_diff_eq!(e[1], 0.5, epsilon = 1e-2);
    assert_abs_diff_eq!(e[0], -0.5, epsilon = 1e-2);
    let exact = disk_modes(1.0, 1, 1.0).unwrap().energy();
    assert!((grid.energy() - exact).abs() / exact < 0.01);
}

#[test]
fn reflection_symmetric_sections() {
    let square = TransversePotential::square(1.0).unwrap();
    let m = grid_modes(&square, &GridSpec::new(48), 0, 1).unwrap();
    let r = reflection_symmetry_report(&square, &m);
    assert_eq!(r.symmetric_axes(), vec![0, 1]);
    assert!(r.consistent());

    let tri = TransversePotential::equilateral_triangle(1.0).unwrap();
    let m = grid_modes(&tri, &GridSpec::new(48), 0, 1).unwrap();
    assert_eq!(reflection_symmetry_report(&tri, &m).symmetric_axes(), vec![0]);

    let scalene = TransversePotential::polygon(vec![[-0.4, -0.3], [0.6, -0.2], [-0.1, 0.5]]).unwrap();
    let m = grid_modes(&scalene, &GridSpec::new(48), 0, 1).unwrap();
    let r = reflection_symmetry_report(&scalene, &m);
    assert!(r.symmetric_axes().is_empty());
    // a real nondegenerate mode has a purely imaginary, hence zero, diagonal
    assert!(r.axes.iter().all(|a| a.max_diagonal < 1e-12));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn variance_is_nonnegative(w1 in 0.2f64..3.0, w2 in 0.2f64..3.0, n1 in 0usize..5, n2 in 0usize..5, hbar in 0.1f64..2.0) {
        let m = harmonic_modes(&[w1, w2], &[vec![n1, n2]], hbar).unwrap();
        prop_assert!(m.lambda_variance()[0] >= -1e-10);
        let closed = lambda2_closed_form(&[w1, w2], &[n1, n2], 0, 1, 0, 1, hbar);
        prop_assert!((m.lambda2(0, 1, 0, 1)[(0, 0)].re - closed).abs() < 1e-10 * closed.abs().max(1.0));
    }

    #[test]
    fn rotation_algebra_closes(w1 in 0.3f64..3.0, w2 in 0.3f64..3.0, w3 in 0.3f64..3.0, hbar in 0.2f64..2.0) {
        prop_assert!(omega_commutator_check(&[w1, w2, w3], 4, hbar) < 1e-10);
    }
}
