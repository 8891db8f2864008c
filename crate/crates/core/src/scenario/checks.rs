//! Identity suite: numerical checks of relations that hold exactly.

use crate::effective::PreliminaryForms;
use crate::framing::{ds_identity_residual, DefaultNormals, FrameField, RotatingNormals};
use crate::geometry::{
    curvature_scalars, embedding_geometry, gauss_equation_residual, AmbientSpace, Cylinder, Embedding, FlatTorus4,
    Plane, Sphere, Torus,
};
use crate::solver::vielbein_kinetic_check;
use crate::transverse::symmetry::{is_reflection_symmetric, VANISHING_TOL};
use crate::transverse::{
    grid_modes, harmonic_modes, omega_commutator_check, GridSpec, ModeSet, Stencil, TransversePotential,
};
use crate::Result;
use serde::Serialize;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// Passes when `value < tolerance`.
    Below,
    /// Passes when `value > tolerance`.
    Above,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub passed: bool,
}

impl CheckItem {
    fn new(name: impl Into<String>, value: f64, tolerance: f64, bound: Bound) -> Self {
        let passed = match bound {
            Bound::Below => value < tolerance,
            Bound::Above => value > tolerance,
        };
        Self { name: name.into(), value, tolerance, bound, passed }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub vielbein_n: usize,
    pub grid_n: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { vielbein_n: 1024, grid_n: 128 }
    }
}

const SURFACE_POINTS: [[f64; 2]; 3] = [[0.3, 0.4], [1.1, 2.0], [0.7, -0.9]];

pub fn gauss_checks() -> Result<Vec<CheckItem>> {
    let space = AmbientSpace::flat(3);
    let surfaces: [(&str, Arc<dyn Embedding>); 4] = [
        ("plane", Arc::new(Plane)),
        ("cylinder", Arc::new(Cylinder { rho: 0.7 })),
        ("sphere", Arc::new(Sphere { rho: 1.3 })),
        ("torus", Arc::new(Torus { big: 2.0, small: 1.0 })),
    ];
    let mut out = Vec::new();
    for (name, e) in surfaces {
        let mut worst = 0.0f64;
        for p in SURFACE_POINTS {
            worst = worst.max(gauss_equation_residual(&space, e.clone(), &p)?);
        }
        out.push(CheckItem::new(format!("gauss_equation/{name}"), worst, 1e-6, Bound::Below));
    }
    Ok(out)
}

/// Flat torus in R^4 with its normal frame rotated by a non-constant angle.
pub fn twisted_flat_torus() -> (AmbientSpace, Arc<dyn Embedding>, RotatingNormals) {
    let space = AmbientSpace::flat(4);
    let embed: Arc<dyn Embedding> = Arc::new(FlatTorus4 { a: 1.0, b: 0.7 });
    let base: Arc<dyn FrameField> = Arc::new(DefaultNormals { space: space.clone(), embed: embed.clone() });
    let frame = RotatingNormals { base, angle: Arc::new(|p: &[f64]| 0.4 * p[0].sin() + 0.3 * p[0] * p[1]) };
    (space, embed, frame)
}

pub fn ds_check() -> Result<CheckItem> {
    let (space, embed, frame) = twisted_flat_torus();
    let mut worst = 0.0f64;
    for p in SURFACE_POINTS {
        worst = worst.max(ds_identity_residual(&space, embed.as_ref(), &frame, &p, 1e-4, 1e-2)?);
    }
    Ok(CheckItem::new("ds_identity/flat_torus_r4", worst, 1e-6, Bound::Below))
}

pub fn commutator_checks() -> Vec<CheckItem> {
    [vec![1.0, 2.0], vec![1.0, 2.0, 5.0 / 3.0]]
        .iter()
        .map(|w| {
            CheckItem::new(
                format!("omega_commutators/d{}", w.len()),
                omega_commutator_check(w, 4, 1.0),
                1e-12,
                Bound::Below,
            )
        })
        .collect()
}

/// Relative spread of the three preliminary extrapotential forms.
pub fn form_checks() -> Result<Vec<CheckItem>> {
    let s3 = AmbientSpace::flat(3);
    let (s4, torus4, frame) = twisted_flat_torus();
    let cases: Vec<(&str, crate::geometry::CurvatureScalars)> = vec![
        ("cylinder", curvature_scalars(&embedding_geometry(&s3, &Cylinder { rho: 0.7 }, &[0.2, 0.5], None)?)),
        ("sphere", curvature_scalars(&embedding_geometry(&s3, &Sphere { rho: 1.3 }, &[1.1, 2.0], None)?)),
        ("torus", curvature_scalars(&embedding_geometry(&s3, &Torus { big: 2.0, small: 1.0 }, &[0.3, 0.9], None)?)),
        (
            "flat_torus_r4",
            curvature_scalars(&embedding_geometry(
                &s4,
                torus4.as_ref(),
                &[0.3, 0.4],
                Some(frame.normals(&[0.3, 0.4])?),
            )?),
        ),
        (
            "plane_in_conformal_space",
            curvature_scalars(&embedding_geometry(&conformal_space(), &Plane, &[0.2, 0.3], None)?),
        ),
    ];
    Ok(cases
        .into_iter()
        .map(|(name, s)| {
            let forms = PreliminaryForms::new(&s, 1.0);
            let scale = [s.tsq, s.msq, s.r_full, s.r_par, s.r_perp, s.r_hat].iter().fold(1.0f64, |a, v| a.max(v.abs()));
            CheckItem::new(format!("vex_forms/{name}"), forms.spread() / scale, 1e-12, Bound::Below)
        })
        .collect())
}

/// Conformally flat three-space `(1 + 0.1 |x|^2)^2 delta`.
pub fn conformal_space() -> AmbientSpace {
    AmbientSpace::with_metric(
        3,
        Arc::new(|x: &[f64]| {
            let f = 1.0 + 0.1 * x.iter().map(|v| v * v).sum::<f64>();
            nalgebra::DMatrix::identity(3, 3) * (f * f)
        }),
        1e-3,
    )
}

pub fn vielbein_checks(n: usize) -> Vec<CheckItem> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let a = vielbein_kinetic_check(|x| (1.0 + 0.3 * x.sin()).powi(2), two_pi, n, 40, 1.0);
    let b = vielbein_kinetic_check(|x| (0.2 * x.cos()).exp(), two_pi, n, 40, 1.0);
    vec![
        CheckItem::new("vielbein/one_plus_sin_squared", a.max_difference, 1e-8, Bound::Below),
        CheckItem::new("vielbein/exp_cos", b.max_difference, 1e-8, Bound::Below),
    ]
}

fn max_lambda_diagonal(modes: &ModeSet) -> f64 {
    let mut worst = 0.0f64;
    for mu in 0..modes.d {
        for nu in 0..modes.d {
            for v in modes.lambda_diagonal(mu, nu) {
                worst = worst.max(v.abs());
            }
        }
    }
    worst
}

/// Vertices of the scalene triangle used for the symmetry check.
pub const SCALENE: [[f64; 2]; 3] = [[-0.45, -0.3], [0.55, -0.3], [-0.1, 0.45]];

pub fn symmetry_checks(grid_n: usize) -> Result<Vec<CheckItem>> {
    let spec = GridSpec::new(grid_n).with_stencil(Stencil::WideCross);
    let square = TransversePotential::square(1.0)?;
    let sq = grid_modes(&square, &spec, 0, 1)?;
    let harmonic = harmonic_modes(&[1.0, 2.0], &[vec![0, 0]], 1.0)?;
    let tri = TransversePotential::polygon(SCALENE.to_vec())?;
    let scalene = grid_modes(&tri, &GridSpec::new(grid_n), 0, 1)?;
    let asymmetric = (0..2).all(|axis| !is_reflection_symmetric(&tri, axis, 4000, 0x51 + axis as u64));
    Ok(vec![
        CheckItem::new("lambda_vanishes/square", max_lambda_diagonal(&sq), VANISHING_TOL, Bound::Below),
        CheckItem::new("lambda_vanishes/harmonic", max_lambda_diagonal(&harmonic), VANISHING_TOL, Bound::Below),
        CheckItem::new("scalene_triangle_asymmetric", if asymmetric { 1.0 } else { 0.0 }, 0.5, Bound::Above),
        CheckItem::new(
            "lambda_nonvanishing/scalene_triangle",
            max_lambda_diagonal(&scalene),
            VANISHING_TOL,
            Bound::Above,
        ),
    ])
}

/// Runs every check.
pub fn identity_suite(opts: &SuiteOptions) -> Result<Vec<CheckItem>> {
    let mut out = gauss_checks()?;
    out.push(ds_check()?);
    out.extend(commutator_checks());
    out.extend(form_checks()?);
    out.extend(vielbein_checks(opts.vielbein_n));
    out.extend(symmetry_checks(opts.grid_n)?);
    Ok(out)
}
