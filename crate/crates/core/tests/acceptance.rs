//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the report is printed by a plain `cargo test`.

use nalgebra::DMatrix;
use qconstrain::effective::{
    curve_field, extrapotential, rotational_invariance_check, sample_embedding_field, Axis, Boundary, PreliminaryForms,
};
use qconstrain::framing::{DefaultNormals, ThetaProfile};
use qconstrain::geometry::curve::{ArcWithLeads, Circle, CurveGeometry, Helix, DEFAULT_STEP};
use qconstrain::geometry::embedding::CurveEmbedding;
use qconstrain::geometry::{
    curvature_scalars, embedding_geometry, AmbientSpace, CurvatureScalars, Cylinder, Embedding, Graph4, Plane, Sphere,
    Torus,
};
use qconstrain::scenario::checks::{identity_suite, SuiteOptions};
use qconstrain::solver::{
    ambient_oracle_2d, discretize_tangential, eigensolve, epsilon_convergence, strip_transverse_energy,
    twisted_ground_level, StripGrid,
};
use qconstrain::transverse::{
    disk_modes, harmonic_lambda_matrices, harmonic_modes, lambda2_closed_form, planar_matrices, ModeLabels, ModeSet,
};
use std::f64::consts::PI;
use std::sync::Arc;

// Items that are expected to fail; see the decisions ledger.
const KNOWN_BLOCKED: &[&str] = &["lambda_nonvanishing/scalene_triangle"];

struct Sub {
    name: String,
    pass: bool,
    detail: String,
}

fn sub(name: impl Into<String>, pass: bool, detail: String) -> Sub {
    Sub { name: name.into(), pass, detail }
}

fn below(name: &str, value: f64, tol: f64) -> Sub {
    sub(name, value < tol, format!("{value:.3e} < {tol:.0e}"))
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

fn lowest(field: &qconstrain::effective::EffectiveField, count: usize) -> Vec<f64> {
    eigensolve(&discretize_tangential(field).unwrap(), count).unwrap().values
}

fn strip_modes(width: f64) -> Arc<ModeSet> {
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

fn bend(lead: f64, samples: usize) -> CurveGeometry {
    CurveGeometry::from_arclength_curve(&ArcWithLeads { rho: 1.0, angle: PI / 2.0, lead }, samples, DEFAULT_STEP)
        .unwrap()
}

fn criterion_1() -> Vec<Sub> {
    let g = CurveGeometry::from_arclength_curve(&Circle { rho: 1.0 }, 256, DEFAULT_STEP).unwrap();
    let modes = Arc::new(harmonic_modes(&[1.0, 1.0], &[vec![0, 0]], 1.0).unwrap());
    let f = curve_field(&g, &ThetaProfile::Constant(0.0), modes).unwrap();
    let dev = f.points.iter().map(|p| (p.vex.total[(0, 0)].re + 0.125).abs()).fold(0.0, f64::max);

    // the three forms evaluated on embedded geometry, curves and surfaces
    let flat3 = AmbientSpace::flat(3);
    let flat4 = AmbientSpace::flat(4);
    let mut spread = 0.0f64;
    let mut arc_vex = 0.0f64;
    let cases: Vec<(&AmbientSpace, Arc<dyn Embedding>, Vec<f64>)> = vec![
        (&flat3, Arc::new(CurveEmbedding { curve: Arc::new(Circle { rho: 1.0 }) }), vec![0.4]),
        (&flat3, Arc::new(CurveEmbedding { curve: Arc::new(Circle { rho: 1.0 }) }), vec![2.9]),
        (&flat3, Arc::new(Torus { big: 2.0, small: 0.7 }), vec![0.3, 1.1]),
        (&flat3, Arc::new(Sphere { rho: 1.3 }), vec![0.8, 0.2]),
        (
            &flat4,
            Arc::new(Graph4 {
                f1: Arc::new(|x, y| 0.3 * x * x + 0.2 * x * y),
                f2: Arc::new(|x, y| 0.25 * x * y - 0.15 * y * y),
            }),
            vec![0.1, 0.2],
        ),
    ];
    for (i, (space, embed, p)) in cases.iter().enumerate() {
        let s = curvature_scalars(&embedding_geometry(space, embed.as_ref(), p, None).unwrap());
        let forms = PreliminaryForms::new(&s, 1.0);
        spread = spread.max(forms.spread());
        if i < 2 {
            arc_vex = arc_vex.max((forms.t_m + 0.125).abs());
        }
    }
    vec![
        below("assembled V_ex + 1/8 on the arc", dev, 1e-12),
        below("spread of the three forms", spread, 1e-12),
        below("embedded arc V_ex^p + 1/8", arc_vex, 1e-6),
    ]
}

fn criterion_2() -> Vec<Sub> {
    let g = bend(1.0, 402);
    let e_eff = lowest(&curve_field(&g, &ThetaProfile::Constant(0.0), strip_modes(1.0)).unwrap(), 1)[0];
    let grid = StripGrid { n_modes: 8, check_resolution: false };
    let r = epsilon_convergence(
        |eps| Ok((ambient_oracle_2d(&g, eps, &grid, 1, 1.0)?.values[0], strip_transverse_energy(eps, 1.0))),
        &[0.2, 0.1, 0.05],
        e_eff,
        1e-12,
    )
    .unwrap();
    let errors: Vec<String> = r.rows.iter().map(|row| format!("{:.3e}", row.abs_error)).collect();
    let order = r.order.unwrap_or(f64::NAN);
    let rel = r.rows.last().unwrap().abs_error / e_eff.abs();
    vec![
        sub("errors decrease", r.monotone(), errors.join(" > ")),
        sub("fitted order", order >= 0.9, format!("{order:.3} >= 0.9")),
        below("relative error at eps = 0.05", rel, 0.05),
    ]
}

fn criterion_3() -> Vec<Sub> {
    let g = bend(10.0, 1200);
    let e_eff = lowest(&curve_field(&g, &ThetaProfile::Constant(0.0), strip_modes(1.0)).unwrap(), 1)[0];
    let eps = 0.05;
    let full = ambient_oracle_2d(&g, eps, &StripGrid { n_modes: 8, check_resolution: false }, 1, 1.0).unwrap();
    let binding = full.values[0] - strip_transverse_energy(eps, 1.0);
    let rel = (binding - e_eff).abs() / e_eff.abs();
    vec![
        sub("effective ground level negative", e_eff < 0.0, format!("{e_eff:.6e}")),
        sub("2D level below threshold", binding < 0.0, format!("{binding:.6e}")),
        below("relative mismatch of the binding energies", rel, 0.1),
    ]
}

// Normalized unit-frequency Hermite functions and derivatives up to `n`.
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

const NMAX: usize = 3;

// m[p][a][b][k][l] = integral of x^p F_a,k F_b,l with F_0 the mode of
// frequency w and F_1 its derivative.
type Moments = Vec<Vec<Vec<[[f64; NMAX + 1]; NMAX + 1]>>>;

fn moments(w: f64) -> Moments {
    let (half, m) = (12.0, 6000);
    let step = 2.0 * half / m as f64;
    let mut out = vec![vec![vec![[[0.0; NMAX + 1]; NMAX + 1]; 2]; 2]; 3];
    for i in 0..=m {
        let x = -half + step * i as f64;
        let (h, dh) = hermite_functions(NMAX, w.sqrt() * x);
        let f: Vec<[f64; 2]> = (0..=NMAX).map(|k| [w.powf(0.25) * h[k], w.powf(0.75) * dh[k]]).collect();
        let weight = if i == 0 || i == m { 0.5 * step } else { step };
        for (p, xp) in [1.0, x, x * x].into_iter().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    for k in 0..=NMAX {
                        for l in 0..=NMAX {
                            out[p][a][b][k][l] += weight * xp * f[k][a] * f[l][b];
                        }
                    }
                }
            }
        }
    }
    out
}

fn criterion_4() -> Vec<Sub> {
    let states: Vec<Vec<usize>> = (0..=NMAX).flat_map(|a| (0..=NMAX).map(move |b| vec![a, b])).collect();
    let mut lambda_err = 0.0f64;
    let mut lambda2_err = 0.0f64;
    let mut closed_err = 0.0f64;
    let mut diag = 0.0f64;
    for ratio in [1.0, 2.0, 5.0 / 3.0] {
        let omega = [1.0, ratio];
        let (mx, my) = (moments(omega[0]), moments(omega[1]));
        let (lambda, lambda2) = harmonic_lambda_matrices(&omega, &states, 1.0);
        for (i, m) in states.iter().enumerate() {
            for (j, n) in states.iter().enumerate() {
                let (m1, m2, n1, n2) = (m[0], m[1], n[0], n[1]);
                // Lambda_12 psi = -(i/2)(x d_y - y d_x) psi
                let l12 =
                    -0.5 * (mx[1][0][0][m1][n1] * my[0][0][1][m2][n2] - mx[0][0][1][m1][n1] * my[1][0][0][m2][n2]);
                let ll = 0.25
                    * (mx[2][0][0][m1][n1] * my[0][1][1][m2][n2]
                        - mx[1][0][1][m1][n1] * my[1][1][0][m2][n2]
                        - mx[1][1][0][m1][n1] * my[1][0][1][m2][n2]
                        + mx[0][1][1][m1][n1] * my[2][0][0][m2][n2]);
                for (mu, nu, sign) in [(0, 1, 1.0), (1, 0, -1.0)] {
                    let z = lambda[mu * 2 + nu][(i, j)];
                    lambda_err = lambda_err.max(z.re.abs()).max((z.im - sign * l12).abs());
                    for (s, t, sign2) in [(0, 1, 1.0), (1, 0, -1.0)] {
                        let z = lambda2[((mu * 2 + nu) * 2 + s) * 2 + t][(i, j)];
                        lambda2_err = lambda2_err.max(z.im.abs()).max((z.re - sign * sign2 * ll).abs());
                    }
                }
                if i == j {
                    closed_err = closed_err.max((lambda2_closed_form(&omega, m, 0, 1, 0, 1, 1.0) - ll).abs());
                    let single = harmonic_modes(&omega, &[m.clone()], 1.0).unwrap();
                    diag = diag.max(single.lambda(0, 1)[(0, 0)].norm());
                }
            }
        }
    }
    vec![
        below("Lambda matrix elements vs quadrature", lambda_err, 1e-8),
        below("Lambda Lambda matrix elements vs quadrature", lambda2_err, 1e-8),
        below("closed-form diagonal vs quadrature", closed_err, 1e-8),
        below("diagonal <Lambda>", diag, 1e-12),
    ]
}

fn criterion_5() -> Vec<Sub> {
    let omega = [1.0, 2.0];
    let e_perp = 1.5;
    let modes = harmonic_modes(&omega, &[vec![0, 0]], 1.0).unwrap();
    let twist = |s: f64| vec![DMatrix::from_row_slice(2, 2, &[0.0, s, -s, 0.0])];
    let predicted =
        |s: f64| extrapotential(&CurvatureScalars::flat_curve(0.0), &twist(s), None, &modes).unwrap().total[(0, 0)].re;
    let analytic = 2.0 * modes.lambda_variance()[0];
    let rates = [0.05, 0.04, 0.03, 0.02, 0.01];
    let shifts: Vec<f64> = rates.iter().map(|&s| twisted_ground_level(s, &omega, 1.0, 14) - e_perp).collect();
    let truncation = rates
        .iter()
        .zip(&shifts)
        .map(|(&s, y)| (twisted_ground_level(s, &omega, 1.0, 18) - e_perp - y).abs())
        .fold(0.0, f64::max);
    let num: f64 = rates.iter().zip(&shifts).map(|(s, y)| s * s * y).sum();
    let den: f64 = rates.iter().map(|s| s.powi(4)).sum();
    let c = num / den;
    let residual = rates.iter().zip(&shifts).map(|(s, y)| (y - c * s * s).abs() / y.abs()).fold(0.0, f64::max);
    let model = rates.iter().zip(&shifts).map(|(&s, y)| (y - predicted(s)).abs() / predicted(s)).fold(0.0, f64::max);
    vec![
        below("Fock truncation", truncation, 1e-12),
        below("quadratic fit residual", residual, 0.01),
        below("fitted coefficient vs 2 Var(Lambda)", (c - analytic).abs() / analytic, 0.01),
        below("oracle shift vs assembled V_ex", model, 0.01),
        below("2 Var(Lambda) vs 1/16", (analytic - 1.0 / 16.0).abs(), 1e-14),
    ]
}

fn criterion_6() -> Vec<Sub> {
    let n = 512;
    let g = CurveGeometry::from_arclength_curve(&Circle { rho: 1.0 }, n, DEFAULT_STEP).unwrap();
    let length = g.length;
    let modes = Arc::new(disk_modes(1.0, 1, 1.0).unwrap());
    let count = 22;
    let spectrum = |rate: f64| -> Vec<f64> {
        let f = curve_field(&g, &ThetaProfile::Linear { theta0: 0.0, rate }, modes.clone()).unwrap();
        lowest(&f, count).into_iter().map(|e| e + 0.125).collect()
    };
    let rate = 0.3;
    // S = -rate on a circle, <Lambda> = +-1/2 on the pair
    let a = -rate;
    let want = sorted(
        (-5i64..=5)
            .flat_map(|j| [1.0, -1.0].map(|sign| 0.5 * (2.0 * PI * j as f64 / length + sign * a).powi(2)))
            .collect(),
    );
    let got = spectrum(rate);
    let dev = got.iter().zip(&want).map(|(x, y)| (x - y).abs() / y).fold(0.0, f64::max);
    let shifted = spectrum(rate + 2.0 * PI / length);
    let inv = got.iter().zip(&shifted).map(|(x, y)| (x - y).abs() / x).fold(0.0, f64::max);
    vec![below("levels vs shifted rotor, |j| <= 5", dev, 1e-3), below("flux-quantum shift", inv, 1e-3)]
}

fn criterion_7() -> Vec<Sub> {
    identity_suite(&SuiteOptions::default())
        .unwrap()
        .into_iter()
        .map(|c| {
            let op = if matches!(c.bound, qconstrain::scenario::checks::Bound::Below) { "<" } else { ">" };
            sub(c.name, c.passed, format!("{:.3e} {op} {:.0e}", c.value, c.tolerance))
        })
        .collect()
}

fn criterion_8() -> Vec<Sub> {
    let g = CurveGeometry::from_arclength_curve(&Helix { radius: 3.0, pitch: 4.0, length: 20.0 }, 800, DEFAULT_STEP)
        .unwrap();
    let wobble = ThetaProfile::Custom(Arc::new(|a: f64| 0.7 * (0.3 * a).sin() + 0.1 * a + 0.05 * a * a));
    let mut out = Vec::new();
    for m in [1usize, 2] {
        let modes = Arc::new(disk_modes(1.0, m, 1.0).unwrap());
        let r = rotational_invariance_check(&g, modes, &ThetaProfile::Constant(0.0), &wobble, 6).unwrap();
        out.push(below(&format!("disk m = {m}"), r.max_difference, 1e-8));
    }
    out
}

fn criterion_9() -> Vec<Sub> {
    let space = AmbientSpace::flat(3);
    let cases: Vec<(&str, Arc<dyn Embedding>, Vec<Axis>, f64, f64)> = vec![
        (
            "sphere",
            Arc::new(Sphere { rho: 1.5 }),
            vec![Axis::new(0.2, PI - 0.2, 12, Boundary::Dirichlet), Axis::new(0.0, 2.0 * PI, 16, Boundary::Periodic)],
            0.0,
            1.0,
        ),
        (
            "cylinder",
            Arc::new(Cylinder { rho: 0.5 }),
            vec![Axis::new(0.0, 4.0, 16, Boundary::Dirichlet), Axis::new(0.0, 2.0 * PI, 16, Boundary::Periodic)],
            -1.0 / (8.0 * 0.25),
            1.0,
        ),
        (
            "cylinder, hbar = 0.4",
            Arc::new(Cylinder { rho: 2.0 }),
            vec![Axis::new(0.0, 4.0, 8, Boundary::Dirichlet), Axis::new(0.0, 2.0 * PI, 8, Boundary::Periodic)],
            -0.16 / (8.0 * 4.0),
            0.4,
        ),
        (
            "torus",
            Arc::new(Torus { big: 2.0, small: 0.5 }),
            vec![Axis::new(0.0, 2.0 * PI, 8, Boundary::Periodic), Axis::new(0.0, 2.0 * PI, 8, Boundary::Periodic)],
            f64::NAN,
            1.0,
        ),
        (
            "plane",
            Arc::new(Plane),
            vec![Axis::new(0.0, 1.0, 6, Boundary::Dirichlet), Axis::new(0.0, 1.0, 6, Boundary::Dirichlet)],
            0.0,
            1.0,
        ),
    ];
    let mut out = Vec::new();
    for (name, embed, axes, want, hbar) in cases {
        let frame = DefaultNormals { space: space.clone(), embed: embed.clone() };
        let f =
            sample_embedding_field(&space, embed.as_ref(), &frame, axes, Arc::new(ModeSet::codim_one(1.0, hbar)), 1e-4)
                .unwrap();
        let gauge = f.max_gauge();
        let aniso = f.max_vex_anisotropy();
        out.push(sub(
            format!("{name}: gauge and anisotropy"),
            gauge == 0.0 && aniso == 0.0,
            format!("{gauge:e}, {aniso:e}"),
        ));
        if want.is_finite() {
            let dev = f.points.iter().map(|p| (p.vex.total[(0, 0)].re - want).abs()).fold(0.0, f64::max);
            out.push(below(&format!("{name}: V_ex - {want:.4}"), dev, 1e-7));
        }
    }
    out
}

fn main() {
    let criteria: [(&str, fn() -> Vec<Sub>); 9] = [
        ("curve extrapotential", criterion_1),
        ("eps limit, bent strip", criterion_2),
        ("curvature-induced bound state", criterion_3),
        ("harmonic Lambda closed forms", criterion_4),
        ("twisted tube", criterion_5),
        ("gauge-flux identity", criterion_6),
        ("identity suite", criterion_7),
        ("rotational invariance", criterion_8),
        ("codim-1 separation", criterion_9),
    ];
    let mut unexpected = Vec::new();
    for (i, (title, run)) in criteria.iter().enumerate() {
        let t0 = std::time::Instant::now();
        let subs = run();
        let pass = subs.iter().all(|s| s.pass);
        println!("{} {}. {title} ({:.1} s)", if pass { "PASS" } else { "FAIL" }, i + 1, t0.elapsed().as_secs_f64());
        for s in &subs {
            let blocked = KNOWN_BLOCKED.contains(&s.name.as_str());
            let tag = match (s.pass, blocked) {
                (true, _) => "ok",
                (false, true) => "FAIL (known)",
                (false, false) => "FAIL",
            };
            println!("    {tag:<12} {}: {}", s.name, s.detail);
            if !s.pass && !blocked {
                unexpected.push(format!("{}: {}", i + 1, s.name));
            }
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
