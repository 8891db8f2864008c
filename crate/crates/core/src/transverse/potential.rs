//! Transverse (constraining) potentials.

use crate::{Error, Result};
use std::fmt;
use std::sync::Arc;

pub type PlanarFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum PotentialKind {
    /// `V = sum_mu omega_mu^2 u_mu^2 / 2`.
    Harmonic { omega: Vec<f64> },
    /// Hard wall: zero inside the polygon, infinite outside.
    Polygon { vertices: Vec<[f64; 2]> },
    /// Hard-wall disk centred at the origin.
    Disk { radius: f64 },
    /// Smooth planar potential on the box `[-half_width, half_width]^2` with
    /// Dirichlet walls at the box edges.
    Function { f: PlanarFn, half_width: f64 },
}

impl fmt::Debug for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Harmonic { omega } => write!(f, "Harmonic {{ omega: {omega:?} }}"),
            Self::Polygon { vertices } => write!(f, "Polygon {{ vertices: {vertices:?} }}"),
            Self::Disk { radius } => write!(f, "Disk {{ radius: {radius} }}"),
            Self::Function { half_width, .. } => {
                write!(f, "Function {{ half_width: {half_width} }}")
            }
        }
    }
}

/// A transverse potential in `d` normal coordinates; mass is 1.
#[derive(Debug, Clone)]
pub struct TransversePotential {
    pub kind: PotentialKind,
    pub hbar: f64,
}

impl TransversePotential {
    pub fn harmonic(omega: Vec<f64>) -> Result<Self> {
        Self::new(PotentialKind::Harmonic { omega }, 1.0)
    }

    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(PotentialKind::Polygon { vertices }, 1.0)
    }

    /// Square of side `side` centred at the origin.
    pub fn square(side: f64) -> Result<Self> {
        let h = side / 2.0;
        Self::polygon(vec![[-h, -h], [h, -h], [h, h], [-h, h]])
    }

    /// Equilateral triangle of side `side` with its centroid at the origin.
    pub fn equilateral_triangle(side: f64) -> Result<Self> {
        let r = side / 3f64.sqrt();
        Self::polygon(
            (0..3)
                .map(|k| {
                    let a = std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                    [r * a.cos(), r * a.sin()]
                })
                .collect(),
        )
    }

    pub fn disk(radius: f64) -> Result<Self> {
        Self::new(PotentialKind::Disk { radius }, 1.0)
    }

    pub fn new(kind: PotentialKind, hbar: f64) -> Result<Self> {
        let p = Self { kind, hbar };
        p.validate()?;
        Ok(p)
    }

    pub fn with_hbar(mut self, hbar: f64) -> Self {
        self.hbar = hbar;
        self
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            PotentialKind::Harmonic { omega } => omega.len(),
            _ => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hbar > 0.0) {
            return Err(Error::InvalidInput(format!("hbar must be positive, got {}", self.hbar)));
        }
        match &self.kind {
            PotentialKind::Harmonic { omega } => {
                if omega.is_empty() || omega.iter().any(|w| !(*w > 0.0)) {
                    return Err(Error::InvalidInput(format!("harmonic frequencies must be positive: {omega:?}")));
                }
            }
            PotentialKind::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::InvalidInput("polygon needs at least 3 vertices".into()));
                }
                if !polygon_is_simple(vertices) {
                    return Err(Error::InvalidInput("polygon is self-intersecting".into()));
                }
                if !point_in_polygon(vertices, 0.0, 0.0) {
                    return Err(Error::InvalidInput("polygon must contain the origin".into()));
                }
            }
            PotentialKind::Disk { radius } => {
                if !(*radius > 0.0) {
                    return Err(Error::InvalidInput("disk radius must be positive".into()));
                }
            }
            PotentialKind::Function { half_width, .. } => {
                if !(*half_width > 0.0) {
                    return Err(Error::InvalidInput("box half width must be positive".into()));
                }
            }
        }
        Ok(())
    }

    /// Whether `u` lies in the allowed region (always true for smooth
    /// potentials inside their box).
    pub fn contains(&self, u: &[f64]) -> bool {
        match &self.kind {
            PotentialKind::Polygon { vertices } => point_in_polygon(vertices, u[0], u[1]),
            PotentialKind::Disk { radius } => u[0] * u[0] + u[1] * u[1] < radius * radius,
            PotentialKind::Function { half_width, .. } => u[0].abs() < *half_width && u[1].abs() < *half_width,
            PotentialKind::Harmonic { .. } => true,
        }
    }

    /// Potential value inside the allowed region.
    pub fn value(&self, u: &[f64]) -> f64 {
        match &self.kind {
            PotentialKind::Harmonic { omega } => 0.5 * omega.iter().zip(u).map(|(w, x)| w * w * x * x).sum::<f64>(),
            PotentialKind::Function { f, .. } => f(u[0], u[1]),
            _ => 0.0,
        }
    }

    pub fn is_hard_wall(&self) -> bool {
        matches!(self.kind, PotentialKind::Polygon { .. } | PotentialKind::Disk { .. })
    }

    /// Axis-aligned box `[(xmin, xmax), (ymin, ymax)]` containing the region
    /// where modes live (planar potentials).
    pub fn bounding_box(&self) -> [(f64, f64); 2] {
        match &self.kind {
            PotentialKind::Polygon { vertices } => {
                let xs = vertices.iter().map(|v| v[0]);
                let ys = vertices.iter().map(|v| v[1]);
                [
                    (xs.clone().fold(f64::INFINITY, f64::min), xs.fold(f64::NEG_INFINITY, f64::max)),
                    (ys.clone().fold(f64::INFINITY, f64::min), ys.fold(f64::NEG_INFINITY, f64::max)),
                ]
            }
            PotentialKind::Disk { radius } => [(-radius, *radius), (-radius, *radius)],
            PotentialKind::Function { half_width, .. } => [(-half_width, *half_width), (-half_width, *half_width)],
            PotentialKind::Harmonic { omega } => {
                // the Gaussian tail beyond 7 oscillator lengths is negligible
                let l = |w: f64| 7.0 * (self.hbar / w).sqrt();
                [(-l(omega[0]), l(omega[0])), (-l(omega[1]), l(omega[1]))]
            }
        }
    }

    /// The potential of width `epsilon` in the scaling family: lengths scale
    /// by `epsilon`, frequencies by `1 / epsilon^2`.
    pub fn scaled(&self, epsilon: f64) -> Self {
        let kind = match &self.kind {
            PotentialKind::Harmonic { omega } => {
                PotentialKind::Harmonic { omega: omega.iter().map(|w| w / (epsilon * epsilon)).collect() }
            }
            PotentialKind::Polygon { vertices } => {
                PotentialKind::Polygon { vertices: vertices.iter().map(|v| [v[0] * epsilon, v[1] * epsilon]).collect() }
            }
            PotentialKind::Disk { radius } => PotentialKind::Disk { radius: radius * epsilon },
            PotentialKind::Function { f, half_width } => {
                let f = f.clone();
                let e = epsilon;
                PotentialKind::Function {
                    f: Arc::new(move |x, y| f(x / e, y / e) / (e * e)),
                    half_width: half_width * e,
                }
            }
        };
        Self { kind, hbar: self.hbar }
    }
}

/// Even-odd ray casting test.
pub fn point_in_polygon(v: &[[f64; 2]], x: f64, y: f64) -> bool {
    let n = v.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = (v[i][0], v[i][1]);
        let (xj, yj) = (v[j][0], v[j][1]);
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let orient = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

pub fn polygon_is_simple(v: &[[f64; 2]]) -> bool {
    let n = v.len();
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}
