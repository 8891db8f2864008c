//! Scenario runner: builds the pipeline described by a [`Scenario`] and
//! writes its artifacts.

use super::schema::{CurveFamily, FrameSpec, GeometrySpec, ModeSpec, Scenario, SurfaceFamily, TransverseSpec};
use crate::effective::{assemble_curve, curve_field, sample_embedding_field, Axis, EffectiveField};
use crate::framing::{curve_potential_twist, curve_profile_twist, CurvePotentialFrame, DefaultNormals, ThetaProfile};
use crate::geometry::curve::reference_frame;
use crate::geometry::{
    AmbientSpace, ArcWithLeads, Circle, CurveGeometry, CurveSample, Cylinder, Ellipse, Embedding, Helix, Linear,
    ParametricCurve, Plane, SampledCurve, Sphere, Torus, Vec3,
};
use crate::numerics::fmt_num;
use crate::solver::{
    ambient_oracle_2d, ambient_oracle_3d_twisted, discretize_tangential, eigensolve_seeded, epsilon_convergence,
    ConvergenceReport, Spectrum, StripGrid,
};
use crate::transverse::{
    disk_modes, grid_modes, harmonic_energy, harmonic_modes, planar_matrices, GridSpec, ModeLabels, ModeSet,
    TransversePotential, DEG_TOL,
};
use crate::{Error, Result, C64};
use nalgebra::DMatrix;
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

/// Finite-difference step for derivatives of parametric families.
pub const DEFAULT_STEP: f64 = 1e-4;

/// Errors below this count as exact in convergence fits.
const CONVERGENCE_FLOOR: f64 = 1e-12;

/// Pipeline stages; each includes the ones before it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Curve,
    Modes,
    Effective,
    Spectrum,
    Converge,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Self::Curve => "curve",
            Self::Modes => "modes",
            Self::Effective => "effective",
            Self::Spectrum => "spectrum",
            Self::Converge => "converge",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub metadata: Value,
}

/// Comment lines opening every CSV file.
pub fn convention_header(name: &str, hbar: f64) -> String {
    format!(
        "# qconstrain {} scenario={}\n\
         # conventions: mass=1; hbar={}; Lambda_{{mu nu}} = (u_mu p_nu - u_nu p_mu)/2 (Lambda_12 = L_z/2 in the plane)\n\
         # conventions: S_{{mu nu i}} = <E_mu, nabla_i E_nu>; along a curve S = E1.dE2/dalpha = -(tau + theta')\n",
        env!("CARGO_PKG_VERSION"),
        name,
        hbar
    )
}

fn conventions(s: &Scenario) -> Value {
    json!({
        "mass": 1.0,
        "hbar": s.hbar,
        "lambda": "Lambda_{mu nu} = (u_mu p_nu - u_nu p_mu)/2, so Lambda_12 = L_z/2",
        "twist": "S_{mu nu i} = <E_mu, nabla_i E_nu>; curves: S = E1.dE2/dalpha = -(tau + theta')",
        "frame_rotation": "E1 = cos(theta) n + sin(theta) b, E2 = -sin(theta) n + cos(theta) b",
        "gauge": "A_i = sqrt(g_ii) S^{mu nu}_i Lambda_{mu nu}; curves: 2 S Lambda_12",
    })
}

enum Geometry {
    Curve { curve: CurveGeometry, frame: CurveFrame },
    Surface { embed: Arc<dyn Embedding>, axes: Vec<Axis> },
}

enum CurveFrame {
    Profile(ThetaProfile),
    Samples(CurvePotentialFrame),
}

fn build_curve(family: &CurveFamily, samples: usize) -> Result<CurveGeometry> {
    let h = DEFAULT_STEP;
    match family {
        CurveFamily::Circle { rho } => CurveGeometry::from_arclength_curve(&Circle { rho: *rho }, samples, h),
        CurveFamily::Helix { radius, pitch, length } => {
            CurveGeometry::from_arclength_curve(&Helix { radius: *radius, pitch: *pitch, length: *length }, samples, h)
        }
        CurveFamily::Ellipse { a, b } => CurveGeometry::from_arclength_curve(&Ellipse { a: *a, b: *b }, samples, h),
        CurveFamily::ArcWithLeads { rho, angle, lead } => {
            CurveGeometry::from_arclength_curve(&ArcWithLeads { rho: *rho, angle: *angle, lead: *lead }, samples, h)
        }
        CurveFamily::Line { length, periodic } => {
            let line = Linear { origin: Vec3::zeros(), velocity: Vec3::new(1.0, 0.0, 0.0), s1: *length };
            if !*periodic {
                return CurveGeometry::from_arclength_curve(&line, samples, h);
            }
            let frame = reference_frame(&line.velocity);
            let samples = (0..samples)
                .map(|j| {
                    let alpha = length * j as f64 / samples as f64;
                    CurveSample { alpha, x: line.point(alpha), frame: frame.clone() }
                })
                .collect();
            Ok(CurveGeometry { samples, closed: true, length: *length, seam_flip: false })
        }
        CurveFamily::Samples { file, closed } => {
            let c = SampledCurve::from_csv(file, *closed)?;
            CurveGeometry::from_arclength_curve(&c, samples, h)
        }
    }
}

fn torsions(curve: &CurveGeometry) -> Vec<f64> {
    curve.samples.iter().map(|s| if s.frame.transported { 0.0 } else { s.frame.tau.unwrap_or(0.0) }).collect()
}

/// `theta(alpha) = -int_0^alpha tau - S alpha`, the frame of constant twist `S`.
fn constant_twist_profile(curve: &CurveGeometry, twist: f64) -> ThetaProfile {
    let tau = torsions(curve);
    let mut nodes = curve.alphas();
    let mut tau_nodes = tau.clone();
    if curve.closed {
        nodes.push(curve.length);
        tau_nodes.push(tau[0]);
    }
    let mut integral = vec![0.0; nodes.len()];
    for j in 1..nodes.len() {
        integral[j] = integral[j - 1] + 0.5 * (tau_nodes[j] + tau_nodes[j - 1]) * (nodes[j] - nodes[j - 1]);
    }
    ThetaProfile::Custom(Arc::new(move |a: f64| {
        let k = nodes.partition_point(|&x| x <= a).clamp(1, nodes.len() - 1);
        let t = (a - nodes[k - 1]) / (nodes[k] - nodes[k - 1]);
        let int = integral[k - 1] + t * (integral[k] - integral[k - 1]);
        -int - twist * a
    }))
}

/// Reads `alpha,e1x,e1y,e1z,e2x,e2y,e2z` and interpolates linearly to the
/// curve samples.
fn read_frame_file(path: &Path, curve: &CurveGeometry) -> Result<CurvePotentialFrame> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    let names = ["alpha", "e1x", "e1y", "e1z", "e2x", "e2y", "e2z"];
    let idx = names
        .iter()
        .map(|n| {
            headers
                .iter()
                .position(|h| h == *n)
                .ok_or_else(|| Error::Parse(format!("{}: missing column `{n}`", path.display())))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<[f64; 7]> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let mut row = [0.0; 7];
        for (k, &i) in idx.iter().enumerate() {
            row[k] = rec
                .get(i)
                .unwrap_or("")
                .parse()
                .map_err(|e| Error::Parse(format!("{} row {}: {e}", path.display(), line + 2)))?;
        }
        rows.push(row);
    }
    if rows.len() < 2 || rows.windows(2).any(|w| !(w[1][0] > w[0][0])) {
        return Err(Error::Parse(format!("{}: needs at least 2 rows with increasing alpha", path.display())));
    }
    let e = curve
        .samples
        .iter()
        .map(|s| {
            let k = rows.partition_point(|r| r[0] <= s.alpha).clamp(1, rows.len() - 1);
            let (p, q) = (&rows[k - 1], &rows[k]);
            let t = ((s.alpha - p[0]) / (q[0] - p[0])).clamp(0.0, 1.0);
            let v = |c: usize| p[c] + t * (q[c] - p[c]);
            [Vec3::new(v(1), v(2), v(3)), Vec3::new(v(4), v(5), v(6))]
        })
        .collect();
    CurvePotentialFrame::from_samples(curve, e)
}

fn surface_embedding(family: &SurfaceFamily) -> Arc<dyn Embedding> {
    match family {
        SurfaceFamily::Plane => Arc::new(Plane),
        SurfaceFamily::Cylinder { rho } => Arc::new(Cylinder { rho: *rho }),
        SurfaceFamily::Sphere { rho } => Arc::new(Sphere { rho: *rho }),
        SurfaceFamily::Torus { big, small } => Arc::new(Torus { big: *big, small: *small }),
    }
}

fn build_geometry(s: &Scenario) -> Result<Geometry> {
    match &s.geometry {
        GeometrySpec::Curve { family, samples } => {
            let curve = build_curve(family, *samples)?;
            let frame = match &s.frame {
                FrameSpec::Frenet => CurveFrame::Profile(ThetaProfile::Constant(0.0)),
                FrameSpec::Constant { theta0 } => CurveFrame::Profile(ThetaProfile::Constant(*theta0)),
                FrameSpec::Linear { theta0, rate } => {
                    CurveFrame::Profile(ThetaProfile::Linear { theta0: *theta0, rate: *rate })
                }
                FrameSpec::Twist { twist } => CurveFrame::Profile(constant_twist_profile(&curve, *twist)),
                FrameSpec::File { file } => CurveFrame::Samples(read_frame_file(file, &curve)?),
            };
            Ok(Geometry::Curve { curve, frame })
        }
        GeometrySpec::Surface { family, axes } => Ok(Geometry::Surface {
            embed: surface_embedding(family),
            axes: axes.iter().map(|a| Axis::new(a.lo, a.hi, a.n, a.boundary)).collect(),
        }),
    }
}

fn harmonic_by_index(omega: &[f64], index: usize, count: usize, hbar: f64) -> Result<ModeSet> {
    let need = index + count + 1;
    let mut states: Vec<Vec<usize>> = Vec::new();
    let mut stack = vec![vec![]];
    while let Some(prefix) = stack.pop() {
        if prefix.len() == omega.len() {
            states.push(prefix);
            continue;
        }
        for n in 0..need {
            let mut p: Vec<usize> = prefix.clone();
            p.push(n);
            stack.push(p);
        }
    }
    let energy = |n: &Vec<usize>| harmonic_energy(omega, n, hbar);
    states.sort_by(|a, b| energy(a).partial_cmp(&energy(b)).unwrap().then_with(|| a.cmp(b)));
    let close = |a: f64, b: f64| (a - b).abs() <= DEG_TOL * a.abs().max(b.abs());
    let e: Vec<f64> = states.iter().map(energy).collect();
    if index > 0 && close(e[index - 1], e[index]) || close(e[index + count - 1], e[index + count]) {
        return Err(Error::DegeneracySplit(format!(
            "harmonic levels {index}..{} cut a degenerate cluster",
            index + count
        )));
    }
    harmonic_modes(omega, &states[index..index + count], hbar)
}

fn grid_spec(s: &Scenario) -> GridSpec {
    GridSpec::new(s.solver.n_grid).with_stencil(s.solver.stencil)
}

fn build_modes(s: &Scenario) -> Result<ModeSet> {
    let hbar = s.hbar;
    match (&s.transverse, &s.modes) {
        (TransverseSpec::Strip { width }, _) => {
            let zero = DMatrix::<C64>::zeros(1, 1);
            let (lambda, lambda2) = planar_matrices(zero.clone(), zero);
            let e = 0.5 * (std::f64::consts::PI * hbar / width).powi(2);
            Ok(ModeSet {
                d: 2,
                hbar,
                energies: vec![e],
                labels: ModeLabels::Analytic(vec!["strip ground".into()]),
                lambda,
                lambda2,
                phase_convention: "real".into(),
            })
        }
        (TransverseSpec::Slab { width }, _) => {
            Ok(ModeSet::codim_one(0.5 * (std::f64::consts::PI * hbar / width).powi(2), hbar))
        }
        (TransverseSpec::Harmonic { omega }, ModeSpec::Occupations { occupations }) => {
            harmonic_modes(omega, occupations, hbar)
        }
        (TransverseSpec::Harmonic { omega }, ModeSpec::Index { index, count }) => {
            harmonic_by_index(omega, *index, *count, hbar)
        }
        (TransverseSpec::Disk { radius }, ModeSpec::Angular { m }) => disk_modes(*radius, *m, hbar),
        (shape, ModeSpec::Index { index, count }) => {
            let pot = match shape {
                TransverseSpec::Disk { radius } => TransversePotential::disk(*radius)?,
                TransverseSpec::Square { side } => TransversePotential::square(*side)?,
                TransverseSpec::Triangle { side } => TransversePotential::equilateral_triangle(*side)?,
                TransverseSpec::Polygon { vertices } => TransversePotential::polygon(vertices.clone())?,
                _ => unreachable!("analytic shapes handled above"),
            };
            grid_modes(&pot.with_hbar(hbar), &grid_spec(s), *index, *count)
        }
        (shape, sel) => Err(Error::InvalidInput(format!("mode selection {sel:?} does not apply to {shape:?}"))),
    }
}

/// Twist `S = S_12` at every curve sample.
fn curve_twist_samples(curve: &CurveGeometry, frame: &CurveFrame) -> Result<Vec<f64>> {
    let t = match frame {
        CurveFrame::Profile(theta) => curve_profile_twist(curve, theta),
        CurveFrame::Samples(f) => curve_potential_twist(f)?,
    };
    Ok(t.s.iter().map(|s| s[0][(0, 1)]).collect())
}

fn build_field(geom: &Geometry, modes: Arc<ModeSet>) -> Result<EffectiveField> {
    match geom {
        Geometry::Curve { curve, frame: CurveFrame::Profile(theta) } => curve_field(curve, theta, modes),
        Geometry::Curve { curve, frame: CurveFrame::Samples(f) } => {
            let t = curve_potential_twist(f)?;
            assemble_curve(curve, &t.s.iter().map(|s| s[0].clone()).collect::<Vec<_>>(), modes)
        }
        Geometry::Surface { embed, axes } => {
            let space = AmbientSpace::flat(3);
            let frame = DefaultNormals { space: space.clone(), embed: embed.clone() };
            sample_embedding_field(&space, embed.as_ref(), &frame, axes.clone(), modes, DEFAULT_STEP)
        }
    }
}

fn create(out: &Path, name: &str, files: &mut Vec<PathBuf>) -> Result<std::io::BufWriter<std::fs::File>> {
    let path = out.join(name);
    let f = std::fs::File::create(&path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    files.push(path);
    Ok(std::io::BufWriter::new(f))
}

fn write_rows<W: Write>(mut w: W, header: &str, columns: &[&str], rows: &[Vec<String>]) -> Result<()> {
    w.write_all(header.as_bytes())?;
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(columns).map_err(crate::effective::field::csv_err)?;
    for r in rows {
        wr.write_record(r).map_err(crate::effective::field::csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

fn write_geometry(s: &Scenario, geom: &Geometry, out: &Path, files: &mut Vec<PathBuf>) -> Result<Value> {
    let header = convention_header(&s.name, s.hbar);
    match geom {
        Geometry::Curve { curve, frame } => {
            let twist = curve_twist_samples(curve, frame)?;
            let theta: Vec<Option<f64>> = match frame {
                CurveFrame::Profile(t) => curve.samples.iter().map(|c| Some(t.eval(c.alpha))).collect(),
                CurveFrame::Samples(_) => vec![None; curve.len()],
            };
            let rows: Vec<Vec<String>> = curve
                .samples
                .iter()
                .zip(&twist)
                .zip(&theta)
                .map(|((c, sv), th)| {
                    vec![
                        fmt_num(c.alpha),
                        fmt_num(c.x[0]),
                        fmt_num(c.x[1]),
                        fmt_num(c.x[2]),
                        fmt_num(c.frame.kappa),
                        if c.frame.transported { "0".into() } else { fmt_num(c.frame.tau.unwrap_or(0.0)) },
                        u8::from(c.frame.transported).to_string(),
                        th.map(fmt_num).unwrap_or_default(),
                        fmt_num(*sv),
                    ]
                })
                .collect();
            write_rows(
                create(out, "curve.csv", files)?,
                &header,
                &["alpha", "x", "y", "z", "kappa", "tau", "transported", "theta", "S"],
                &rows,
            )?;
            let transported = curve.samples.iter().filter(|c| c.frame.transported).count();
            Ok(json!({
                "kind": "curve",
                "samples": curve.len(),
                "length": curve.length,
                "closed": curve.closed,
                "transported_samples": transported,
                "max_kappa": curve.kappas().iter().cloned().fold(0.0, f64::max),
                "max_abs_twist": twist.iter().fold(0.0f64, |a, v| a.max(v.abs())),
            }))
        }
        Geometry::Surface { embed, axes } => {
            let space = AmbientSpace::flat(3);
            let nodes: Vec<Vec<f64>> = axes.iter().map(|a| a.nodes()).collect();
            let mut rows = Vec::new();
            for &u in &nodes[0] {
                for &v in &nodes[1] {
                    let q = [u, v];
                    let x = embed.point(&q);
                    let j = embed.jacobian(&q);
                    let g = j.transpose() * space.metric(x.as_slice())? * &j;
                    rows.push(vec![
                        fmt_num(u),
                        fmt_num(v),
                        fmt_num(x[0]),
                        fmt_num(x[1]),
                        fmt_num(x[2]),
                        fmt_num(g[(0, 0)]),
                        fmt_num(g[(1, 1)]),
                    ]);
                }
            }
            write_rows(create(out, "surface.csv", files)?, &header, &["u", "v", "x", "y", "z", "g_uu", "g_vv"], &rows)?;
            Ok(json!({
                "kind": "surface",
                "grid": axes.iter().map(|a| a.n).collect::<Vec<_>>(),
            }))
        }
    }
}

fn mode_label(modes: &ModeSet, i: usize) -> String {
    match &modes.labels {
        ModeLabels::Occupations(o) => o[i].iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" "),
        ModeLabels::Grid(_) => format!("grid {i}"),
        ModeLabels::Analytic(l) => l[i].clone(),
    }
}

fn write_modes(s: &Scenario, modes: &ModeSet, out: &Path, files: &mut Vec<PathBuf>) -> Result<Value> {
    let header = convention_header(&s.name, s.hbar);
    let pairs: Vec<(usize, usize)> = (0..modes.d).flat_map(|a| (a + 1..modes.d).map(move |b| (a, b))).collect();
    let mut columns = vec!["index".to_string(), "energy".into(), "label".into()];
    for (a, b) in &pairs {
        columns.push(format!("Lambda_{}{}_diag", a + 1, b + 1));
    }
    let diags: Vec<Vec<f64>> = pairs.iter().map(|&(a, b)| modes.lambda_diagonal(a, b)).collect();
    let rows: Vec<Vec<String>> = (0..modes.k())
        .map(|i| {
            let mut r = vec![i.to_string(), fmt_num(modes.energies[i]), mode_label(modes, i)];
            r.extend(diags.iter().map(|d| fmt_num(d[i])));
            r
        })
        .collect();
    write_rows(
        create(out, "modes.csv", files)?,
        &header,
        &columns.iter().map(String::as_str).collect::<Vec<_>>(),
        &rows,
    )?;
    if let ModeLabels::Grid(g) = &modes.labels {
        let full: Vec<Vec<f64>> = (0..g.vectors.len()).map(|m| g.full(m)).collect();
        let mut cols = vec!["x".to_string(), "y".into()];
        cols.extend((0..full.len()).map(|m| format!("chi_{m}")));
        let mut rows = Vec::with_capacity(g.mask.len());
        for ix in 0..g.nx() {
            for iy in 0..g.ny() {
                let mut r = vec![fmt_num(g.x[ix]), fmt_num(g.y[iy])];
                r.extend(full.iter().map(|f| fmt_num(f[ix * g.ny() + iy])));
                rows.push(r);
            }
        }
        write_rows(
            create(out, "modes_grid.csv", files)?,
            &header,
            &cols.iter().map(String::as_str).collect::<Vec<_>>(),
            &rows,
        )?;
    }
    let max_abs_diag = diags.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    Ok(json!({
        "codimension": modes.d,
        "k": modes.k(),
        "energy": modes.energy(),
        "energies": modes.energies,
        "labels": (0..modes.k()).map(|i| mode_label(modes, i)).collect::<Vec<_>>(),
        "lambda_diagonal": pairs.iter().zip(&diags).map(|((a, b), d)| (format!("{}{}", a + 1, b + 1), json!(d))).collect::<serde_json::Map<_, _>>(),
        "max_abs_lambda_diagonal": max_abs_diag,
        "lambda_variance": if modes.d == 2 { json!(modes.lambda_variance()) } else { Value::Null },
        "structure_residual": modes.structure_residual(),
        "degeneracy_spread": modes.degeneracy_spread(),
        "phase_convention": modes.phase_convention,
    }))
}

fn write_field(
    s: &Scenario,
    geom: &Geometry,
    field: &EffectiveField,
    out: &Path,
    files: &mut Vec<PathBuf>,
) -> Result<Value> {
    let mut w = create(out, "effective_field.csv", files)?;
    w.write_all(convention_header(&s.name, s.hbar).as_bytes())?;
    field.write_csv(w)?;
    let mut vex_min = f64::INFINITY;
    let mut vex_max = f64::NEG_INFINITY;
    let mut off_identity = 0.0f64;
    for p in &field.points {
        let v = &p.vex.total;
        let mean = (0..field.k).map(|a| v[(a, a)].re).sum::<f64>() / field.k as f64;
        vex_min = vex_min.min(mean);
        vex_max = vex_max.max(mean);
        for a in 0..field.k {
            for b in 0..field.k {
                let target = if a == b { C64::from(mean) } else { C64::from(0.0) };
                off_identity = off_identity.max((v[(a, b)] - target).norm());
            }
        }
    }
    let mut meta = json!({
        "nodes": field.len(),
        "max_gauge": field.max_gauge(),
        "max_hermitian_residual": field.max_hermitian_residual(),
        "vex_min": vex_min,
        "vex_max": vex_max,
        "vex_max_deviation_from_identity": off_identity,
    });
    if let Geometry::Curve { curve, frame } = geom {
        if field.d == 2 {
            let twist = curve_twist_samples(curve, frame)?;
            let diag = field.modes.lambda_diagonal(0, 1);
            let coeff =
                twist.iter().flat_map(|sv| diag.iter().map(move |l| (2.0 * sv * l).abs())).fold(0.0f64, f64::max);
            meta["max_gauge_coefficient_2S_lambda"] = json!(coeff);
        }
    }
    Ok(meta)
}

fn write_spectrum(
    s: &Scenario,
    spec: &Spectrum,
    modes: &ModeSet,
    out: &Path,
    files: &mut Vec<PathBuf>,
) -> Result<Value> {
    let e_perp = modes.energy();
    let rows: Vec<Vec<String>> = spec
        .values
        .iter()
        .zip(&spec.residuals)
        .enumerate()
        .map(|(i, (v, r))| vec![i.to_string(), fmt_num(*v), fmt_num(e_perp), fmt_num(*r)])
        .collect();
    write_rows(
        create(out, "spectrum.csv", files)?,
        &convention_header(&s.name, s.hbar),
        &["index", "E_parallel", "E_perp", "residual"],
        &rows,
    )?;
    Ok(json!({
        "values": spec.values,
        "method": spec.method,
        "iterations": spec.iterations,
        "max_residual": spec.residuals.iter().cloned().fold(0.0, f64::max),
        "E_perp": e_perp,
    }))
}

/// Twist of a straight tube, read from its frame.
fn tube_twist(frame: &FrameSpec) -> Result<f64> {
    match frame {
        FrameSpec::Frenet | FrameSpec::Constant { .. } => Ok(0.0),
        FrameSpec::Linear { rate, .. } => Ok(-rate),
        FrameSpec::Twist { twist } => Ok(*twist),
        FrameSpec::File { .. } => {
            Err(Error::InvalidInput("the twisted-tube reference solve needs a constant-twist frame profile".into()))
        }
    }
}

fn converge(s: &Scenario, geom: &Geometry, modes: &ModeSet, e_effective: f64) -> Result<ConvergenceReport> {
    let eps = s
        .solver
        .eps_list
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("convergence study needs `solver.eps_list`".into()))?;
    let curve = match geom {
        Geometry::Curve { curve, .. } => curve,
        Geometry::Surface { .. } => return Err(Error::InvalidInput("no reference solver for surfaces".into())),
    };
    let hbar = s.hbar;
    match &s.transverse {
        TransverseSpec::Strip { width } => {
            let grid = StripGrid { n_modes: s.solver.strip_modes, check_resolution: true };
            let width = *width;
            epsilon_convergence(
                |e| {
                    let w = e * width;
                    let full = ambient_oracle_2d(curve, w, &grid, 1, hbar)?;
                    Ok((full.values[0], crate::solver::strip_transverse_energy(w, hbar)))
                },
                eps,
                e_effective,
                CONVERGENCE_FLOOR,
            )
        }
        TransverseSpec::Harmonic { omega } => {
            let occ = match &modes.labels {
                ModeLabels::Occupations(o) if o.len() == 1 && o[0].iter().all(|n| *n == 0) => o[0].clone(),
                _ => {
                    return Err(Error::InvalidInput(
                        "the twisted-tube reference solve compares the transverse ground state only".into(),
                    ))
                }
            };
            let s0 = tube_twist(&s.frame)?;
            let pot = TransversePotential::harmonic(omega.clone())?.with_hbar(hbar);
            epsilon_convergence(
                |e| {
                    let full =
                        ambient_oracle_3d_twisted(s0, &pot, curve.length, e, s.solver.n_basis, s.solver.j_max, 1)?;
                    let w: Vec<f64> = omega.iter().map(|w| w / (e * e)).collect();
                    Ok((full.values[0], harmonic_energy(&w, &occ, hbar)))
                },
                eps,
                e_effective,
                CONVERGENCE_FLOOR,
            )
        }
        other => Err(Error::InvalidInput(format!("no reference solver for {other:?}"))),
    }
}

fn with_context<T>(stage: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::InvalidInput(m) => Error::InvalidInput(format!("{stage}: {m}")),
        other => other,
    })
}

/// Runs the pipeline up to `stage`, writing artifacts into `out`.
/// `seed` overrides the scenario seed.
pub fn run_scenario(s: &Scenario, stage: Stage, out: &Path, seed: Option<u64>) -> Result<RunReport> {
    std::fs::create_dir_all(out)?;
    let seed = seed.unwrap_or(s.seed);
    let mut files = Vec::new();
    let mut timings = serde_json::Map::new();
    let mut meta = json!({
        "conventions": conventions(s),
        "versions": {
            "qconstrain": env!("CARGO_PKG_VERSION"),
            "schema_version": s.schema_version,
        },
        "scenario": serde_json::to_value(s).map_err(|e| Error::Parse(e.to_string()))?,
        "seed": seed,
        "stage": stage.name(),
    });

    let t = Instant::now();
    let geom = with_context("geometry", build_geometry(s))?;
    meta["geometry"] = with_context("geometry", write_geometry(s, &geom, out, &mut files))?;
    timings.insert("geometry".into(), json!(t.elapsed().as_secs_f64()));

    if stage >= Stage::Modes {
        let t = Instant::now();
        let modes = Arc::new(with_context("transverse", build_modes(s))?);
        meta["modes"] = write_modes(s, &modes, out, &mut files)?;
        timings.insert("transverse".into(), json!(t.elapsed().as_secs_f64()));

        if stage >= Stage::Effective {
            let t = Instant::now();
            let field = with_context("effective", build_field(&geom, modes.clone()))?;
            meta["effective"] = write_field(s, &geom, &field, out, &mut files)?;
            timings.insert("effective".into(), json!(t.elapsed().as_secs_f64()));

            if stage >= Stage::Spectrum {
                let t = Instant::now();
                let op = with_context("solver", discretize_tangential(&field))?;
                let count = s.solver.k_eigs.min(op.dim());
                let spec = with_context("solver", eigensolve_seeded(&op, count, seed))?;
                meta["spectrum"] = write_spectrum(s, &spec, &modes, out, &mut files)?;
                timings.insert("spectrum".into(), json!(t.elapsed().as_secs_f64()));

                if stage >= Stage::Converge {
                    let t = Instant::now();
                    let report = with_context("convergence", converge(s, &geom, &modes, spec.values[0]))?;
                    let mut w = create(out, "convergence.csv", &mut files)?;
                    w.write_all(convention_header(&s.name, s.hbar).as_bytes())?;
                    report.write_csv(w)?;
                    let last = report.rows.last().expect("at least three widths");
                    meta["convergence"] = json!({
                        "rows": report.rows.len(),
                        "order": report.order,
                        "monotone": report.monotone(),
                        "E_effective": spec.values[0],
                        "final_abs_error": last.abs_error,
                        "final_relative_error": last.abs_error / spec.values[0].abs().max(f64::MIN_POSITIVE),
                    });
                    timings.insert("convergence".into(), json!(t.elapsed().as_secs_f64()));
                }
            }
        }
    }
    meta["timings_s"] = Value::Object(timings);
    files.push(out.join("metadata.json"));
    meta["files"] =
        json!(files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect::<Vec<_>>());
    let text = serde_json::to_string_pretty(&meta).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(out.join("metadata.json"), text + "\n")?;
    Ok(RunReport { files, metadata: meta })
}

/// Full run: through the convergence study when `eps_list` is present.
pub fn default_stage(s: &Scenario) -> Stage {
    if s.solver.eps_list.is_some() {
        Stage::Converge
    } else {
        Stage::Spectrum
    }
}
