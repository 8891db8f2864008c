use approx::assert_abs_diff_eq;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use qconstrain::framing::twist::curve_twist_at;
use qconstrain::framing::{
    curve_potential_twist, curve_profile_twist, curve_twist_decomposition, ds_identity_residual, normal_curvature,
    normal_curvature_from_connection, potential_twist, ConstantlyRotated, CurvePotentialFrame, DefaultNormals,
    FrameField, RotatingNormals, ThetaProfile,
};
use qconstrain::geometry::curve::{Circle, CurveGeometry, Helix};
use qconstrain::geometry::{embedding_geometry, AmbientSpace, Embedding, FlatTorus4, Graph4, Sphere};
use qconstrain::Result;
use std::f64::consts::PI;
use std::sync::Arc;

// Normals of the x axis spun at a constant rate, written out by hand.
struct SpunLine {
    rate: f64,
}

impl FrameField for SpunLine {
    fn normals(&self, p: &[f64]) -> Result<Vec<DVector<f64>>> {
        let (s, c) = (self.rate * p[0]).sin_cos();
        Ok(vec![DVector::from_vec(vec![0.0, c, s]), DVector::from_vec(vec![0.0, -s, c])])
    }
}

#[test]
fn spun_line_twists_against_its_rate() {
    for rate in [0.0, 0.4, -1.3] {
        for a in [0.0, 0.7, 3.0] {
            assert_abs_diff_eq!(curve_twist_at(&SpunLine { rate }, a, 1e-4).unwrap(), -rate, epsilon = 1e-8);
        }
    }
}

#[test]
fn helix_with_wobbling_frame() {
    let helix = Helix { radius: 3.0, pitch: 4.0, length: 25.0 };
    let g = CurveGeometry::from_arclength_curve(&helix, 600, 1e-4).unwrap();
    let theta = ThetaProfile::Custom(Arc::new(|a: f64| 0.5 * (0.4 * a).sin()));
    let f = CurvePotentialFrame::from_curve(&g, &theta);
    let dec = curve_twist_decomposition(&g, &f).unwrap();
    assert!(dec.residual < 1e-6);
    for j in 10..590 {
        let a = dec.alpha[j];
        let expect = -0.16 - 0.2 * (0.4 * a).cos();
        assert_abs_diff_eq!(dec.s[j], expect, epsilon = 1e-6);
        assert_abs_diff_eq!(dec.tau[j], 0.16, epsilon = 1e-6);
    }
    let profile = curve_profile_twist(&g, &theta);
    for j in 10..590 {
        assert_abs_diff_eq!(profile.scalar(j, 0), dec.s[j], epsilon = 1e-6);
    }
}

#[test]
fn circle_turning_once() {
    let g = CurveGeometry::from_arclength_curve(&Circle { rho: 0.8 }, 300, 1e-4).unwrap();
    let l = g.length;
    let f = CurvePotentialFrame::from_curve(&g, &ThetaProfile::Linear { theta0: 1.0, rate: 2.0 * PI / l });
    let t = curve_potential_twist(&f).unwrap();
    for j in 0..t.len() {
        assert_abs_diff_eq!(t.scalar(j, 0), -2.0 * PI / l, epsilon = 1e-6);
    }
}

#[test]
fn hypersurfaces_carry_no_twist() {
    let space = AmbientSpace::flat(3);
    let embed: Arc<dyn Embedding> = Arc::new(Sphere { rho: 1.2 });
    let frame = DefaultNormals { space: space.clone(), embed: embed.clone() };
    let pts = vec![vec![0.7, 0.3], vec![1.4, 2.2], vec![2.1, -1.0]];
    let t = potential_twist(&space, embed.as_ref(), &frame, &pts, 1e-4).unwrap();
    assert_eq!(t.d, 1);
    assert!(t.s.iter().flatten().all(|m| m[(0, 0)] == 0.0));
}

fn twisted_torus() -> (AmbientSpace, Arc<dyn Embedding>, Arc<dyn FrameField>) {
    let space = AmbientSpace::flat(4);
    let embed: Arc<dyn Embedding> = Arc::new(FlatTorus4 { a: 1.0, b: 0.6 });
    let base: Arc<dyn FrameField> = Arc::new(DefaultNormals { space: space.clone(), embed: embed.clone() });
    let frame: Arc<dyn FrameField> =
        Arc::new(RotatingNormals { base, angle: Arc::new(|p: &[f64]| 0.3 * p[0] * p[1] + 0.2 * (2.0 * p[1]).cos()) });
    (space, embed, frame)
}

#[test]
fn constant_rotation_conjugates_the_twist() {
    let (space, embed, frame) = twisted_torus();
    let pts = vec![vec![0.2, 0.4], vec![1.1, -0.3], vec![2.5, 1.9]];
    let t = potential_twist(&space, embed.as_ref(), frame.as_ref(), &pts, 1e-4).unwrap();
    let (s, c) = 0.9f64.sin_cos();
    for q in [DMatrix::from_row_slice(2, 2, &[c, s, -s, c]), DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])] {
        let rotated = ConstantlyRotated { base: frame.clone(), q: q.clone() };
        let direct = potential_twist(&space, embed.as_ref(), &rotated, &pts, 1e-4).unwrap();
        let conj = t.rotated(&q);
        for (a, b) in direct.s.iter().flatten().zip(conj.s.iter().flatten()) {
            assert!((a - b).amax() < 1e-10);
        }
    }
}

#[test]
fn flat_torus_twist_is_the_angle_gradient() {
    // the default normals of the flat torus are parallel, so S_i = -d_i angle
    let (space, embed, frame) = twisted_torus();
    let p = [0.8, 0.5];
    let t = potential_twist(&space, embed.as_ref(), frame.as_ref(), &[p.to_vec()], 1e-4).unwrap();
    let grad = [0.3 * p[1], 0.3 * p[0] - 0.4 * (2.0 * p[1]).sin()];
    for i in 0..2 {
        assert_abs_diff_eq!(t.scalar(0, i).abs(), grad[i].abs(), epsilon = 1e-7);
    }
}

#[test]
fn graph_normal_curvature_two_routes() {
    let space = AmbientSpace::flat(4);
    let embed: Arc<dyn Embedding> = Arc::new(Graph4 {
        f1: Arc::new(|x, y| 0.3 * x * x + 0.2 * x * y),
        f2: Arc::new(|x, y| 0.25 * x * y - 0.15 * y * y),
    });
    let frame = DefaultNormals { space: space.clone(), embed: embed.clone() };
    for p in [[0.1, 0.2], [-0.3, 0.25], [0.4, -0.1]] {
        let geom = embedding_geometry(&space, embed.as_ref(), &p, Some(frame.normals(&p).unwrap())).unwrap();
        let formula = normal_curvature(&geom);
        let conn = normal_curvature_from_connection(&space, embed.as_ref(), &frame, &p, 1e-5, 1e-3).unwrap();
        assert_eq!(formula.len(), 1);
        assert!(formula[0].b.amax() > 1e-2);
        assert!((&formula[0].b - &conn[0].b).amax() < 1e-5);
    }
}

#[test]
fn antisymmetry_defect_shrinks_with_sampling() {
    let helix = Helix { radius: 1.0, pitch: 0.5, length: 12.0 };
    let theta = ThetaProfile::Custom(Arc::new(|a: f64| (0.8 * a).sin()));
    let coarse = CurveGeometry::from_arclength_curve(&helix, 24, 1e-4).unwrap();
    assert!(matches!(
        curve_potential_twist(&CurvePotentialFrame::from_curve(&coarse, &theta)),
        Err(qconstrain::Error::GridTooCoarse(_))
    ));
    let raw: Vec<f64> = [200, 400, 800]
        .iter()
        .map(|&n| {
            let g = CurveGeometry::from_arclength_curve(&helix, n, 1e-4).unwrap();
            curve_potential_twist(&CurvePotentialFrame::from_curve(&g, &theta)).unwrap().raw_antisymmetry
        })
        .collect();
    assert!(raw[1] < raw[0] && raw[2] < raw[1]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ds_identity_on_twisted_torus(x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let (space, embed, frame) = twisted_torus();
        let r = ds_identity_residual(&space, embed.as_ref(), frame.as_ref(), &[x, y], 1e-4, 1e-2).unwrap();
        prop_assert!(r < 1e-6, "residual {r:e}");
    }

    #[test]
    fn twist_splits_into_torsion_and_rotation(r in 0.5f64..3.0, c in 0.2f64..3.0, rate in -1.0f64..1.0) {
        let g = CurveGeometry::from_arclength_curve(&Helix { radius: r, pitch: c, length: 10.0 }, 1200, 1e-4).unwrap();
        let f = CurvePotentialFrame::from_curve(&g, &ThetaProfile::Linear { theta0: 0.0, rate });
        let dec = curve_twist_decomposition(&g, &f).unwrap();
        prop_assert!(dec.residual < 1e-6);
        for j in 5..1195 {
            prop_assert!((dec.s[j] + c / (r * r + c * c) + rate).abs() < 1e-6);
        }
    }
}
