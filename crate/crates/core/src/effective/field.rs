//! The constrained Hamiltonian data on a grid over the submanifold.

use super::extrapotential::{extrapotential, gauge_matrix, ExtrapotentialBreakdown};
use crate::framing::twist::{curve_link_twist, curve_profile_twist};
use crate::framing::ThetaProfile;
use crate::geometry::curve::CurveGeometry;
use crate::geometry::CurvatureScalars;
use crate::numerics::fmt_num;
use crate::transverse::ModeSet;
use crate::{Error, Result, C64};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Dirichlet,
}

/// One coordinate axis of the tangential grid. Periodic axes have nodes
/// `lo + j h` with `h = (hi - lo) / n`; Dirichlet axes have interior nodes
/// `lo + (j + 1) h` with `h = (hi - lo) / (n + 1)` and walls at `lo`, `hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub boundary: Boundary,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, n: usize, boundary: Boundary) -> Self {
        Self { lo, hi, n, boundary }
    }

    pub fn spacing(&self) -> f64 {
        match self.boundary {
            Boundary::Periodic => (self.hi - self.lo) / self.n as f64,
            Boundary::Dirichlet => (self.hi - self.lo) / (self.n + 1) as f64,
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        let off = if self.boundary == Boundary::Periodic { 0.0 } else { 1.0 };
        (0..self.n).map(|j| self.lo + (j as f64 + off) * h).collect()
    }

    /// Number of links between consecutive unknowns (including the seam for
    /// periodic axes).
    pub fn links(&self) -> usize {
        match self.boundary {
            Boundary::Periodic => self.n,
            Boundary::Dirichlet => self.n.saturating_sub(1),
        }
    }
}

/// Inputs at one grid node.
#[derive(Debug, Clone)]
pub struct PointInput {
    pub q: Vec<f64>,
    /// Diagonal coordinate metric `g_ii` (orthogonal coordinates).
    pub metric: Vec<f64>,
    pub scalars: CurvatureScalars,
    /// `S_{mu nu i}` along the orthonormal tangent frame `E_i = X_i / |X_i|`.
    pub twist: Vec<DMatrix<f64>>,
    /// Normal-frame ambient curvature `R_{mu nu s t}` flattened as
    /// `((mu d + nu) d + s) d + t`; `None` for flat ambient spaces.
    pub riemann_normal: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct FieldPoint {
    pub q: Vec<f64>,
    pub metric: Vec<f64>,
    pub scalars: CurvatureScalars,
    pub twist: Vec<DMatrix<f64>>,
    /// Coordinate components `A_i = sqrt(g_ii) S^{mu nu}_(i) Lambda_{mu nu}`.
    pub gauge: Vec<DMatrix<C64>>,
    pub vex: ExtrapotentialBreakdown,
}

/// `H_par = K_par + V_ex` sampled on a tangential grid.
#[derive(Debug, Clone)]
pub struct EffectiveField {
    pub m: usize,
    pub d: usize,
    pub k: usize,
    pub hbar: f64,
    pub axes: Vec<Axis>,
    /// Nodes in row-major order (last axis fastest).
    pub points: Vec<FieldPoint>,
    /// `links[axis][node]`: integral of `A_axis dq^axis` from `node` to its
    /// successor along `axis` (zero where no successor exists).
    pub links: Vec<Vec<DMatrix<C64>>>,
    /// Adiabatic correction `E2(q)` added to the diagonal.
    pub vef_extra: Option<Vec<f64>>,
    pub modes: Arc<ModeSet>,
}

impl EffectiveField {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn boundary(&self) -> Boundary {
        if self.axes.iter().all(|a| a.boundary == Boundary::Periodic) {
            Boundary::Periodic
        } else {
            Boundary::Dirichlet
        }
    }

    /// Grid shape along each axis.
    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.n).collect()
    }

    /// Flat node index of a multi-index.
    pub fn node(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.axes).fold(0, |acc, (i, a)| acc * a.n + i)
    }

    /// Successor of `node` along `axis`, if any.
    pub fn successor(&self, node: usize, axis: usize) -> Option<usize> {
        let stride: usize = self.axes[axis + 1..].iter().map(|a| a.n).product();
        let n = self.axes[axis].n;
        let i = (node / stride) % n;
        if i + 1 < n {
            Some(node + stride)
        } else if self.axes[axis].boundary == Boundary::Periodic {
            Some(node + stride - n * stride)
        } else {
            None
        }
    }

    /// Full potential matrix `V_ex + E2 I` at a node.
    pub fn potential(&self, node: usize) -> DMatrix<C64> {
        let v = self.points[node].vex.total.clone();
        match &self.vef_extra {
            Some(e2) => v + DMatrix::<C64>::identity(self.k, self.k) * C64::from(e2[node]),
            None => v,
        }
    }

    /// Codimension-2 reduction at a node: the scalars `S_i` with
    /// `S_{mu nu i} = S_i eps_{mu nu}` and the matrix `Lambda` with
    /// `Lambda_{mu nu} = Lambda eps_{mu nu}`.
    pub fn codim2_view(&self, node: usize) -> Result<(Vec<f64>, DMatrix<C64>)> {
        if self.d != 2 {
            return Err(Error::UnsupportedDimension(self.d));
        }
        let s = self.points[node].twist.iter().map(|t| t[(0, 1)]).collect();
        Ok((s, self.modes.lambda(0, 1).clone()))
    }

    /// Largest |gauge| entry over all nodes and directions.
    pub fn max_gauge(&self) -> f64 {
        self.points
            .iter()
            .flat_map(|p| p.gauge.iter().map(|a| a.camax()))
            .chain(self.links.iter().flatten().map(|a| a.camax()))
            .fold(0.0, f64::max)
    }

    /// Largest off-identity part of `V_ex` over all nodes.
    pub fn max_vex_anisotropy(&self) -> f64 {
        self.points
            .iter()
            .map(|p| {
                let v = &p.vex.total;
                let mean = v.trace() / C64::from(self.k as f64);
                (v - DMatrix::<C64>::identity(self.k, self.k) * mean).camax()
            })
            .fold(0.0, f64::max)
    }

    pub fn max_hermitian_residual(&self) -> f64 {
        self.points.iter().map(|p| p.vex.hermitian_residual).fold(0.0, f64::max)
    }

    /// Replaces the link integrals along `axis` with externally computed
    /// integrated twist matrices `int S_{mu nu (axis)} sqrt(g) dq`.
    pub fn with_link_twist(mut self, axis: usize, integrated: &[DMatrix<f64>]) -> Result<Self> {
        if integrated.len() != self.axes[axis].links() {
            return Err(Error::ShapeMismatch(format!(
                "{} link integrals for {} links",
                integrated.len(),
                self.axes[axis].links()
            )));
        }
        let mut out = vec![DMatrix::<C64>::zeros(self.k, self.k); self.points.len()];
        let mut next = 0;
        for (node, slot) in out.iter_mut().enumerate() {
            if self.successor(node, axis).is_some() {
                *slot = gauge_matrix(&integrated[next], &self.modes);
                next += 1;
            }
        }
        self.links[axis] = out;
        Ok(self)
    }

    /// CSV dump: coordinates, `V_ex` entries and gauge entries per direction.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header: Vec<String> =
            (0..self.m).map(|i| if self.m == 1 { "alpha".to_string() } else { format!("q{}", i + 1) }).collect();
        for a in 0..self.k {
            for b in 0..self.k {
                header.push(format!("Vex_{a}{b}_re"));
                header.push(format!("Vex_{a}{b}_im"));
            }
        }
        if self.vef_extra.is_some() {
            header.push("E2".into());
        }
        for i in 0..self.m {
            for a in 0..self.k {
                for b in 0..self.k {
                    header.push(format!("A{}_{a}{b}_re", i + 1));
                    header.push(format!("A{}_{a}{b}_im", i + 1));
                }
            }
        }
        wr.write_record(&header).map_err(csv_err)?;
        for (node, p) in self.points.iter().enumerate() {
            let mut row: Vec<String> = p.q.iter().map(|v| fmt_num(*v)).collect();
            for a in 0..self.k {
                for b in 0..self.k {
                    let v = p.vex.total[(a, b)];
                    row.push(fmt_num(v.re));
                    row.push(fmt_num(v.im));
                }
            }
            if let Some(e2) = &self.vef_extra {
                row.push(fmt_num(e2[node]));
            }
            for g in &p.gauge {
                for a in 0..self.k {
                    for b in 0..self.k {
                        row.push(fmt_num(g[(a, b)].re));
                        row.push(fmt_num(g[(a, b)].im));
                    }
                }
            }
            wr.write_record(&row).map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Assembles the field from per-node inputs. Link integrals default to the
/// trapezoid rule over the coordinate gauge values.
pub fn assemble_effective(inputs: Vec<PointInput>, axes: Vec<Axis>, modes: Arc<ModeSet>) -> Result<EffectiveField> {
    let m = axes.len();
    if m == 0 || m > 2 {
        return Err(Error::UnsupportedDimension(m));
    }
    let total: usize = axes.iter().map(|a| a.n).product();
    if inputs.len() != total {
        return Err(Error::ShapeMismatch(format!("{} inputs for a grid of {total} nodes", inputs.len())));
    }
    let d = modes.d;
    let k = modes.k();
    let mut points = Vec::with_capacity(total);
    for inp in inputs {
        if inp.twist.len() != m || inp.metric.len() != m || inp.q.len() != m {
            return Err(Error::ShapeMismatch(format!("node at {:?} has inconsistent tangent data", inp.q)));
        }
        if let Some(r) = &inp.riemann_normal {
            if r.len() != d * d * d * d {
                return Err(Error::ShapeMismatch("normal curvature block has the wrong size".into()));
            }
        }
        let rfn = inp.riemann_normal.as_ref().map(|r| {
            let r = r.clone();
            move |a: usize, b: usize, c: usize, e: usize| r[((a * d + b) * d + c) * d + e]
        });
        let rdyn: Option<&dyn Fn(usize, usize, usize, usize) -> f64> =
            rfn.as_ref().map(|f| f as &dyn Fn(usize, usize, usize, usize) -> f64);
        let vex = extrapotential(&inp.scalars, &inp.twist, rdyn, &modes)?;
        let gauge =
            inp.twist.iter().zip(&inp.metric).map(|(s, g)| gauge_matrix(s, &modes) * C64::from(g.sqrt())).collect();
        points.push(FieldPoint { q: inp.q, metric: inp.metric, scalars: inp.scalars, twist: inp.twist, gauge, vex });
    }
    let mut field = EffectiveField { m, d, k, hbar: modes.hbar, axes, points, links: vec![], vef_extra: None, modes };
    let mut links = Vec::with_capacity(m);
    for axis in 0..m {
        let h = field.axes[axis].spacing();
        let l: Vec<DMatrix<C64>> = (0..total)
            .map(|node| match field.successor(node, axis) {
                Some(next) => (&field.points[node].gauge[axis] + &field.points[next].gauge[axis]) * C64::from(0.5 * h),
                None => DMatrix::zeros(k, k),
            })
            .collect();
        links.push(l);
    }
    field.links = links;
    Ok(field)
}

/// Curve in flat three-space: sample scalars `kappa^2` and the twist
/// `S_{mu nu}` per curve sample. Open curves drop their end samples, which
/// become Dirichlet walls.
pub fn assemble_curve(curve: &CurveGeometry, twist: &[DMatrix<f64>], modes: Arc<ModeSet>) -> Result<EffectiveField> {
    let n = curve.len();
    if twist.len() != n {
        return Err(Error::ShapeMismatch(format!("{} twist samples for {n} curve samples", twist.len())));
    }
    let (axis, range) = if curve.closed {
        (Axis::new(0.0, curve.length, n, Boundary::Periodic), 0..n)
    } else {
        if n < 3 {
            return Err(Error::InvalidInput("open curve needs at least 3 samples".into()));
        }
        (Axis::new(0.0, curve.length, n - 2, Boundary::Dirichlet), 1..n - 1)
    };
    let inputs = range
        .map(|j| PointInput {
            q: vec![curve.samples[j].alpha],
            metric: vec![1.0],
            scalars: CurvatureScalars::flat_curve(curve.samples[j].frame.kappa),
            twist: vec![twist[j].clone()],
            riemann_normal: None,
        })
        .collect();
    assemble_effective(inputs, vec![axis], modes)
}

/// Adds the adiabatic correction `E2(q)` to the diagonal.
pub fn effective_potential_nonconstant<F: Fn(&[f64]) -> f64>(field: &EffectiveField, e2: F) -> Result<EffectiveField> {
    let values: Vec<f64> = field.points.iter().map(|p| e2(&p.q)).collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("E2 is not finite at {:?}", field.points[i].q)));
    }
    let mut out = field.clone();
    out.vef_extra = Some(values);
    Ok(out)
}

/// Field of a curve whose potential frame is rotated by `theta` from the
/// Frenet frame, with link integrals taken from the exact angle increments.
pub fn curve_field(curve: &CurveGeometry, theta: &ThetaProfile, modes: Arc<ModeSet>) -> Result<EffectiveField> {
    if modes.d != 2 {
        return Err(Error::UnsupportedDimension(modes.d));
    }
    let twist = curve_profile_twist(curve, theta);
    let field = assemble_curve(curve, &twist.s.iter().map(|s| s[0].clone()).collect::<Vec<_>>(), modes)?;
    let links = curve_link_twist(curve, theta);
    let links = if curve.closed { links } else { links[1..links.len() - 1].to_vec() };
    field.with_link_twist(0, &links)
}
