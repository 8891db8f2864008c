//! Scenario files: a strict, versioned TOML schema.
//!
//! Every table is checked against its list of known keys before any value is
//! read, and all violations are collected into one [`Error::Validation`].

use crate::effective::Boundary;
use crate::transverse::Stencil;
use crate::{Error, Result};
use serde::Serialize;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use toml::{Table, Value};

pub const SCHEMA_VERSION: i64 = 1;
pub const DEFAULT_HBAR: f64 = 1.0;
pub const DEFAULT_N_GRID: usize = 256;
pub const DEFAULT_SAMPLES: usize = 400;
pub const DEFAULT_K_EIGS: usize = 6;

const TOP_KEYS: &[&str] =
    &["schema_version", "name", "hbar", "seed", "output", "geometry", "frame", "transverse", "modes", "solver"];
const GEOMETRY_KEYS: &[&str] = &[
    "family", "samples", "rho", "angle", "lead", "radius", "pitch", "length", "a", "b", "periodic", "file", "closed",
    "big", "small", "u_range", "v_range", "grid", "boundary",
];
const FRAME_KEYS: &[&str] = &["profile", "theta0", "rate", "twist", "file"];
const TRANSVERSE_KEYS: &[&str] = &["shape", "width", "omega", "radius", "side", "vertices"];
const MODES_KEYS: &[&str] = &["occupations", "index", "count", "m"];
const SOLVER_KEYS: &[&str] = &["n_grid", "stencil", "k_eigs", "eps_list", "strip_modes", "n_basis", "j_max"];

const CURVE_FAMILIES: &[&str] = &["circle", "helix", "ellipse", "arc-with-leads", "line", "samples"];
const SURFACE_FAMILIES: &[&str] = &["plane", "cylinder", "sphere", "torus"];

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum CurveFamily {
    Circle { rho: f64 },
    Helix { radius: f64, pitch: f64, length: f64 },
    Ellipse { a: f64, b: f64 },
    ArcWithLeads { rho: f64, angle: f64, lead: f64 },
    Line { length: f64, periodic: bool },
    Samples { file: PathBuf, closed: bool },
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum SurfaceFamily {
    Plane,
    Cylinder { rho: f64 },
    Sphere { rho: f64 },
    Torus { big: f64, small: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct AxisSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub boundary: Boundary,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeometrySpec {
    Curve { family: CurveFamily, samples: usize },
    Surface { family: SurfaceFamily, axes: Vec<AxisSpec> },
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "profile", rename_all = "kebab-case")]
pub enum FrameSpec {
    Frenet,
    Constant {
        theta0: f64,
    },
    Linear {
        theta0: f64,
        rate: f64,
    },
    /// Frame with constant twist `S` along the whole curve.
    Twist {
        twist: f64,
    },
    File {
        file: PathBuf,
    },
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum TransverseSpec {
    /// Hard-wall interval across a planar curve (two-dimensional guide).
    Strip {
        width: f64,
    },
    /// Hard-wall interval normal to a surface.
    Slab {
        width: f64,
    },
    Harmonic {
        omega: Vec<f64>,
    },
    Disk {
        radius: f64,
    },
    Square {
        side: f64,
    },
    Triangle {
        side: f64,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
}

impl TransverseSpec {
    pub fn codim(&self) -> usize {
        match self {
            Self::Slab { .. } => 1,
            Self::Harmonic { omega } => omega.len(),
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "select", rename_all = "kebab-case")]
pub enum ModeSpec {
    Occupations { occupations: Vec<Vec<usize>> },
    Index { index: usize, count: usize },
    Angular { m: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverSpec {
    pub n_grid: usize,
    pub stencil: Stencil,
    pub k_eigs: usize,
    pub eps_list: Option<Vec<f64>>,
    pub strip_modes: usize,
    pub n_basis: usize,
    pub j_max: usize,
}

/// A fully validated scenario with defaults applied.
#[derive(Debug, Clone, Serialize)]
pub struct Scenario {
    pub schema_version: i64,
    pub name: String,
    pub hbar: f64,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub geometry: GeometrySpec,
    pub frame: FrameSpec,
    pub transverse: TransverseSpec,
    pub modes: ModeSpec,
    pub solver: SolverSpec,
}

/// Reads and validates a scenario file. Relative file references resolve
/// against the scenario's directory.
pub fn parse_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_scenario_str(&text, &base)
}

pub fn parse_scenario_str(text: &str, base_dir: &Path) -> Result<Scenario> {
    let root: Table = text.parse::<Table>().map_err(|e| Error::Parse(e.to_string()))?;
    let mut r = Reader { text, base: base_dir, errors: Vec::new() };
    let scenario = r.scenario(&root);
    if r.errors.is_empty() {
        Ok(scenario.expect("validated scenario"))
    } else {
        Err(Error::Validation(r.errors))
    }
}

/// Closest known key by edit distance, if reasonably close.
pub fn suggest<'a>(key: &str, known: &[&'a str]) -> Option<&'a str> {
    known
        .iter()
        .map(|k| (strsim::levenshtein(key, k), *k))
        .filter(|(d, k)| *d <= 2.max(k.len() / 3))
        .min_by_key(|(d, _)| *d)
        .map(|(_, k)| k)
}

struct Reader<'a> {
    text: &'a str,
    base: &'a Path,
    errors: Vec<String>,
}

impl<'a> Reader<'a> {
    /// Line of `key = ...` inside `[table]` (or before the first header for
    /// top-level keys).
    fn line_of(&self, table: &str, key: &str) -> Option<usize> {
        let mut current = String::new();
        for (i, line) in self.text.lines().enumerate() {
            let t = line.trim();
            if let Some(h) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                current = h.trim().to_string();
                continue;
            }
            if current == table {
                if let Some((k, _)) = t.split_once('=') {
                    if k.trim().trim_matches('"') == key {
                        return Some(i + 1);
                    }
                }
            }
        }
        None
    }

    fn fail(&mut self, table: &str, key: &str, msg: impl std::fmt::Display) {
        let field = if table.is_empty() { key.to_string() } else { format!("{table}.{key}") };
        match self.line_of(table, key) {
            Some(l) => self.errors.push(format!("line {l}: `{field}` {msg}")),
            None => self.errors.push(format!("`{field}` {msg}")),
        }
    }

    fn check_keys(&mut self, table: &str, t: &Table, known: &[&str]) {
        for key in t.keys() {
            if !known.contains(&key.as_str()) {
                let hint = match suggest(key, known) {
                    Some(s) => format!("; did you mean `{s}`?"),
                    None => String::new(),
                };
                self.fail(table, key, format!("is not a known key{hint}"));
            }
        }
    }

    fn sub<'t>(&mut self, root: &'t Table, name: &str, known: &[&str], required: bool) -> Option<&'t Table> {
        match root.get(name) {
            Some(Value::Table(t)) => {
                self.check_keys(name, t, known);
                Some(t)
            }
            Some(_) => {
                self.fail("", name, "must be a table");
                None
            }
            None => {
                if required {
                    self.errors.push(format!("missing required table `[{name}]`"));
                }
                None
            }
        }
    }

    fn float(&mut self, table: &str, t: &Table, key: &str, default: Option<f64>) -> Option<f64> {
        match t.get(key) {
            Some(Value::Float(v)) => Some(*v),
            Some(Value::Integer(v)) => Some(*v as f64),
            Some(_) => {
                self.fail(table, key, "must be a number");
                None
            }
            None => {
                if default.is_none() {
                    self.fail(table, key, "is required");
                }
                default
            }
        }
    }

    fn positive(&mut self, table: &str, t: &Table, key: &str, default: Option<f64>) -> Option<f64> {
        let v = self.float(table, t, key, default)?;
        if !(v > 0.0) || !v.is_finite() {
            self.fail(table, key, format!("must be positive (got {v})"));
            return None;
        }
        Some(v)
    }

    fn nonneg(&mut self, table: &str, t: &Table, key: &str, default: Option<f64>) -> Option<f64> {
        let v = self.float(table, t, key, default)?;
        if !(v >= 0.0) || !v.is_finite() {
            self.fail(table, key, format!("must be non-negative (got {v})"));
            return None;
        }
        Some(v)
    }

    fn int(&mut self, table: &str, t: &Table, key: &str, default: Option<i64>, min: i64) -> Option<i64> {
        let v = match t.get(key) {
            Some(Value::Integer(v)) => *v,
            Some(_) => {
                self.fail(table, key, "must be an integer");
                return None;
            }
            None => {
                if default.is_none() {
                    self.fail(table, key, "is required");
                }
                return default;
            }
        };
        if v < min {
            self.fail(table, key, format!("must be at least {min} (got {v})"));
            return None;
        }
        Some(v)
    }

    fn boolean(&mut self, table: &str, t: &Table, key: &str, default: bool) -> Option<bool> {
        match t.get(key) {
            Some(Value::Boolean(b)) => Some(*b),
            Some(_) => {
                self.fail(table, key, "must be true or false");
                None
            }
            None => Some(default),
        }
    }

    fn text_of(&mut self, table: &str, t: &Table, key: &str, required: bool) -> Option<String> {
        match t.get(key) {
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => {
                self.fail(table, key, "must be a string");
                None
            }
            None => {
                if required {
                    self.fail(table, key, "is required");
                }
                None
            }
        }
    }

    fn choice(&mut self, table: &str, t: &Table, key: &str, options: &[&str], default: Option<&str>) -> Option<String> {
        let v = match self.text_of(table, t, key, default.is_none()) {
            Some(v) => v,
            None => return default.map(str::to_string),
        };
        if options.contains(&v.as_str()) {
            return Some(v);
        }
        let hint = match suggest(&v, options) {
            Some(s) => format!("; did you mean \"{s}\"?"),
            None => format!("; expected one of {}", options.join(", ")),
        };
        self.fail(table, key, format!("has unknown value \"{v}\"{hint}"));
        None
    }

    fn floats(&mut self, table: &str, t: &Table, key: &str) -> Option<Vec<f64>> {
        let arr = match t.get(key)? {
            Value::Array(a) => a,
            _ => {
                self.fail(table, key, "must be an array of numbers");
                return None;
            }
        };
        let mut out = Vec::with_capacity(arr.len());
        for v in arr {
            match v {
                Value::Float(x) => out.push(*x),
                Value::Integer(x) => out.push(*x as f64),
                _ => {
                    self.fail(table, key, "must be an array of numbers");
                    return None;
                }
            }
        }
        Some(out)
    }

    fn file(&mut self, table: &str, t: &Table, key: &str) -> Option<PathBuf> {
        let name = self.text_of(table, t, key, true)?;
        let p = Path::new(&name);
        let resolved = if p.is_absolute() { p.to_path_buf() } else { self.base.join(p) };
        if !resolved.is_file() {
            self.fail(table, key, format!("refers to a missing file {}", resolved.display()));
            return None;
        }
        Some(resolved)
    }

    fn scenario(&mut self, root: &Table) -> Option<Scenario> {
        self.check_keys("", root, TOP_KEYS);
        let version = self.int("", root, "schema_version", None, 0);
        if let Some(v) = version {
            if v != SCHEMA_VERSION {
                self.fail(
                    "",
                    "schema_version",
                    format!("{v} is not supported (this build reads version {SCHEMA_VERSION})"),
                );
            }
        }
        let name = self.text_of("", root, "name", true);
        if let Some(n) = &name {
            if n.is_empty() || n.contains(['/', '\\']) {
                self.fail("", "name", "must be a non-empty name without path separators");
            }
        }
        let hbar = self.positive("", root, "hbar", Some(DEFAULT_HBAR));
        let seed = self.int("", root, "seed", Some(0), 0).map(|s| s as u64);
        let output = self.text_of("", root, "output", false).map(PathBuf::from);

        let geometry = self.sub(root, "geometry", GEOMETRY_KEYS, true).and_then(|t| self.geometry(t));
        let frame_table = self.sub(root, "frame", FRAME_KEYS, false);
        let frame = match frame_table {
            Some(t) => self.frame(t),
            None => Some(FrameSpec::Frenet),
        };
        let transverse = self.sub(root, "transverse", TRANSVERSE_KEYS, true).and_then(|t| self.transverse(t));
        let empty = Table::new();
        let modes_table = self.sub(root, "modes", MODES_KEYS, false).unwrap_or(&empty);
        let modes = self.modes(modes_table, transverse.as_ref());
        let solver_table = self.sub(root, "solver", SOLVER_KEYS, false).unwrap_or(&empty);
        let solver = self.solver(solver_table);

        if let (Some(g), Some(tr)) = (&geometry, &transverse) {
            self.cross_check(g, frame.as_ref(), tr, solver.as_ref());
        }
        Some(Scenario {
            schema_version: version?,
            name: name?,
            hbar: hbar?,
            seed: seed?,
            output,
            geometry: geometry?,
            frame: frame?,
            transverse: transverse?,
            modes: modes?,
            solver: solver?,
        })
    }

    fn geometry(&mut self, t: &Table) -> Option<GeometrySpec> {
        let all: Vec<&str> = CURVE_FAMILIES.iter().chain(SURFACE_FAMILIES).copied().collect();
        let family = self.choice("geometry", t, "family", &all, None)?;
        let g = "geometry";
        if CURVE_FAMILIES.contains(&family.as_str()) {
            let samples = self.int(g, t, "samples", Some(DEFAULT_SAMPLES as i64), 8).map(|v| v as usize);
            let fam = match family.as_str() {
                "circle" => CurveFamily::Circle { rho: self.positive(g, t, "rho", None)? },
                "helix" => CurveFamily::Helix {
                    radius: self.positive(g, t, "radius", None)?,
                    pitch: self.nonneg(g, t, "pitch", None)?,
                    length: self.positive(g, t, "length", None)?,
                },
                "ellipse" => {
                    CurveFamily::Ellipse { a: self.positive(g, t, "a", None)?, b: self.positive(g, t, "b", None)? }
                }
                "arc-with-leads" => {
                    let rho = self.positive(g, t, "rho", None);
                    let angle = self.positive(g, t, "angle", None);
                    let lead = self.nonneg(g, t, "lead", Some(1.0));
                    if let Some(a) = angle {
                        if a >= 2.0 * PI {
                            self.fail(g, "angle", format!("must be below 2 pi (got {a})"));
                        }
                    }
                    CurveFamily::ArcWithLeads { rho: rho?, angle: angle?, lead: lead? }
                }
                "line" => CurveFamily::Line {
                    length: self.positive(g, t, "length", None)?,
                    periodic: self.boolean(g, t, "periodic", false)?,
                },
                _ => CurveFamily::Samples {
                    file: self.file(g, t, "file")?,
                    closed: self.boolean(g, t, "closed", false)?,
                },
            };
            return Some(GeometrySpec::Curve { family: fam, samples: samples? });
        }
        let (fam, ranges, periodic) = match family.as_str() {
            "plane" => (Some(SurfaceFamily::Plane), [(0.0, 1.0), (0.0, 1.0)], [false, false]),
            "cylinder" => (
                self.positive(g, t, "rho", None).map(|rho| SurfaceFamily::Cylinder { rho }),
                [(0.0, 1.0), (0.0, 2.0 * PI)],
                [false, true],
            ),
            "sphere" => (
                self.positive(g, t, "rho", None).map(|rho| SurfaceFamily::Sphere { rho }),
                [(0.25, PI - 0.25), (0.0, 2.0 * PI)],
                [false, true],
            ),
            _ => {
                let big = self.positive(g, t, "big", None);
                let small = self.positive(g, t, "small", None);
                if let (Some(b), Some(s)) = (big, small) {
                    if s >= b {
                        self.fail(g, "small", format!("must be below `big` (got {s} >= {b})"));
                    }
                }
                (
                    big.zip(small).map(|(big, small)| SurfaceFamily::Torus { big, small }),
                    [(0.0, 2.0 * PI), (0.0, 2.0 * PI)],
                    [true, true],
                )
            }
        };
        let mut axes = Vec::new();
        let grid = match t.get("grid") {
            None => Some([32usize, 32]),
            Some(Value::Array(a)) if a.len() == 2 && a.iter().all(|v| matches!(v, Value::Integer(n) if *n >= 4)) => {
                Some([a[0].as_integer().unwrap() as usize, a[1].as_integer().unwrap() as usize])
            }
            Some(_) => {
                self.fail(g, "grid", "must be two integers, each at least 4");
                None
            }
        };
        let boundary = match t.get("boundary") {
            None => Some(periodic.map(|p| if p { Boundary::Periodic } else { Boundary::Dirichlet })),
            Some(Value::Array(a)) if a.len() == 2 => {
                let mut out = [Boundary::Dirichlet; 2];
                let mut ok = true;
                for (i, v) in a.iter().enumerate() {
                    match v.as_str() {
                        Some("periodic") => out[i] = Boundary::Periodic,
                        Some("dirichlet") => out[i] = Boundary::Dirichlet,
                        _ => ok = false,
                    }
                }
                if !ok {
                    self.fail(g, "boundary", "entries must be \"periodic\" or \"dirichlet\"");
                }
                ok.then_some(out)
            }
            Some(_) => {
                self.fail(g, "boundary", "must be a pair of boundary names");
                None
            }
        };
        for (i, key) in ["u_range", "v_range"].iter().enumerate() {
            let r = match self.floats(g, t, key) {
                Some(v) if v.len() == 2 && v[0] < v[1] => Some((v[0], v[1])),
                Some(_) => {
                    self.fail(g, key, "must be an increasing pair [lo, hi]");
                    None
                }
                None if t.contains_key(*key) => None,
                None => Some(ranges[i]),
            };
            if let (Some((lo, hi)), Some(n), Some(b)) = (r, grid, boundary) {
                axes.push(AxisSpec { lo, hi, n: n[i], boundary: b[i] });
            }
        }
        if axes.len() != 2 {
            return None;
        }
        Some(GeometrySpec::Surface { family: fam?, axes })
    }

    fn frame(&mut self, t: &Table) -> Option<FrameSpec> {
        let f = "frame";
        let default = if t.contains_key("twist") {
            "twist"
        } else if t.contains_key("file") {
            "file"
        } else if t.contains_key("rate") {
            "linear"
        } else {
            "frenet"
        };
        let profile =
            self.choice(f, t, "profile", &["frenet", "constant", "linear", "twist", "file"], Some(default))?;
        Some(match profile.as_str() {
            "frenet" => FrameSpec::Frenet,
            "constant" => FrameSpec::Constant { theta0: self.float(f, t, "theta0", Some(0.0))? },
            "linear" => FrameSpec::Linear {
                theta0: self.float(f, t, "theta0", Some(0.0))?,
                rate: self.float(f, t, "rate", None)?,
            },
            "twist" => FrameSpec::Twist { twist: self.float(f, t, "twist", None)? },
            _ => FrameSpec::File { file: self.file(f, t, "file")? },
        })
    }

    fn transverse(&mut self, t: &Table) -> Option<TransverseSpec> {
        let s = "transverse";
        let shape =
            self.choice(s, t, "shape", &["strip", "slab", "harmonic", "disk", "square", "triangle", "polygon"], None)?;
        Some(match shape.as_str() {
            "strip" => TransverseSpec::Strip { width: self.positive(s, t, "width", Some(1.0))? },
            "slab" => TransverseSpec::Slab { width: self.positive(s, t, "width", Some(1.0))? },
            "harmonic" => {
                let omega = match self.floats(s, t, "omega") {
                    Some(w) => w,
                    None => {
                        if !t.contains_key("omega") {
                            self.fail(s, "omega", "is required");
                        }
                        return None;
                    }
                };
                if omega.is_empty() || omega.iter().any(|w| !(*w > 0.0)) {
                    self.fail(s, "omega", "must be a non-empty list of positive frequencies");
                    return None;
                }
                TransverseSpec::Harmonic { omega }
            }
            "disk" => TransverseSpec::Disk { radius: self.positive(s, t, "radius", Some(1.0))? },
            "square" => TransverseSpec::Square { side: self.positive(s, t, "side", Some(1.0))? },
            "triangle" => TransverseSpec::Triangle { side: self.positive(s, t, "side", Some(1.0))? },
            _ => {
                let verts = match t.get("vertices") {
                    Some(Value::Array(a)) => a
                        .iter()
                        .map(|p| match p {
                            Value::Array(xy) if xy.len() == 2 => {
                                let c: Vec<f64> = xy
                                    .iter()
                                    .filter_map(|v| v.as_float().or(v.as_integer().map(|i| i as f64)))
                                    .collect();
                                (c.len() == 2).then(|| [c[0], c[1]])
                            }
                            _ => None,
                        })
                        .collect::<Option<Vec<_>>>(),
                    _ => None,
                };
                match verts {
                    Some(v) if v.len() >= 3 => TransverseSpec::Polygon { vertices: v },
                    _ => {
                        self.fail(s, "vertices", "must list at least three [x, y] points");
                        return None;
                    }
                }
            }
        })
    }

    fn modes(&mut self, t: &Table, tr: Option<&TransverseSpec>) -> Option<ModeSpec> {
        let m = "modes";
        if let Some(v) = t.get("occupations") {
            let occ = match v {
                Value::Array(rows) => rows
                    .iter()
                    .map(|r| match r {
                        Value::Array(ns) => {
                            ns.iter().map(|n| n.as_integer().filter(|k| *k >= 0).map(|k| k as usize)).collect()
                        }
                        _ => None,
                    })
                    .collect::<Option<Vec<Vec<usize>>>>(),
                _ => None,
            };
            return match occ {
                Some(o) if !o.is_empty() => {
                    if let Some(TransverseSpec::Harmonic { omega }) = tr {
                        if o.iter().any(|r| r.len() != omega.len()) {
                            self.fail(
                                m,
                                "occupations",
                                format!("rows must have {} entries (one per frequency)", omega.len()),
                            );
                            return None;
                        }
                    } else if tr.is_some() {
                        self.fail(m, "occupations", "only applies to harmonic cross-sections");
                        return None;
                    }
                    Some(ModeSpec::Occupations { occupations: o })
                }
                _ => {
                    self.fail(m, "occupations", "must be a non-empty list of non-negative integer lists");
                    None
                }
            };
        }
        if t.contains_key("m") {
            let k = self.int(m, t, "m", None, 0)? as usize;
            if !matches!(tr, Some(TransverseSpec::Disk { .. }) | None) {
                self.fail(m, "m", "only applies to disk cross-sections");
                return None;
            }
            return Some(ModeSpec::Angular { m: k });
        }
        let index = self.int(m, t, "index", Some(0), 0)? as usize;
        let count = self.int(m, t, "count", Some(1), 1)? as usize;
        match tr {
            Some(TransverseSpec::Harmonic { omega }) if !t.contains_key("index") && !t.contains_key("count") => {
                Some(ModeSpec::Occupations { occupations: vec![vec![0; omega.len()]] })
            }
            Some(TransverseSpec::Disk { .. }) if index == 0 && count == 1 => Some(ModeSpec::Angular { m: 0 }),
            _ => Some(ModeSpec::Index { index, count }),
        }
    }

    fn solver(&mut self, t: &Table) -> Option<SolverSpec> {
        let s = "solver";
        let n_grid = self.int(s, t, "n_grid", Some(DEFAULT_N_GRID as i64), 16).map(|v| v as usize);
        let stencil = self
            .choice(s, t, "stencil", &["five-point", "nine-point", "wide-cross"], Some("five-point"))
            .map(|v| match v.as_str() {
                "nine-point" => Stencil::NinePoint,
                "wide-cross" => Stencil::WideCross,
                _ => Stencil::FivePoint,
            });
        let k_eigs = self.int(s, t, "k_eigs", Some(DEFAULT_K_EIGS as i64), 1).map(|v| v as usize);
        let strip_modes = self.int(s, t, "strip_modes", Some(8), 2).map(|v| v as usize);
        let n_basis = self.int(s, t, "n_basis", Some(12), 2).map(|v| v as usize);
        let j_max = self.int(s, t, "j_max", Some(4), 0).map(|v| v as usize);
        let eps_list = match t.get("eps_list") {
            None => Some(None),
            Some(_) => match self.floats(s, t, "eps_list") {
                None => None,
                Some(list) => {
                    let mut ok = true;
                    for (i, e) in list.iter().enumerate() {
                        if !(*e > 0.0) {
                            self.fail(s, "eps_list", format!("entry {i} must be positive (got {e})"));
                            ok = false;
                        }
                    }
                    if list.len() < 3 {
                        self.fail(s, "eps_list", format!("needs at least 3 values (got {})", list.len()));
                        ok = false;
                    }
                    if list.windows(2).any(|w| w[1] >= w[0]) {
                        self.fail(s, "eps_list", "must be strictly decreasing");
                        ok = false;
                    }
                    ok.then_some(Some(list))
                }
            },
        };
        Some(SolverSpec {
            n_grid: n_grid?,
            stencil: stencil?,
            k_eigs: k_eigs?,
            eps_list: eps_list?,
            strip_modes: strip_modes?,
            n_basis: n_basis?,
            j_max: j_max?,
        })
    }

    fn cross_check(
        &mut self,
        g: &GeometrySpec,
        frame: Option<&FrameSpec>,
        tr: &TransverseSpec,
        solver: Option<&SolverSpec>,
    ) {
        match g {
            GeometrySpec::Curve { family, .. } => {
                if tr.codim() != 2 {
                    self.fail("transverse", "shape", "curves in three-space need a two-dimensional cross-section");
                }
                if matches!(tr, TransverseSpec::Strip { .. }) {
                    let planar = matches!(
                        family,
                        CurveFamily::Circle { .. }
                            | CurveFamily::Ellipse { .. }
                            | CurveFamily::ArcWithLeads { .. }
                            | CurveFamily::Line { .. }
                    );
                    if !planar {
                        self.fail("transverse", "shape", "a strip needs a planar curve family");
                    }
                    if !matches!(frame, Some(FrameSpec::Frenet) | None) {
                        self.fail("frame", "profile", "a strip is tied to the in-plane normal; use the frenet profile");
                    }
                }
            }
            GeometrySpec::Surface { .. } => {
                if !matches!(tr, TransverseSpec::Slab { .. }) {
                    self.fail(
                        "transverse",
                        "shape",
                        "surfaces in three-space need the one-dimensional `slab` cross-section",
                    );
                }
                if !matches!(frame, Some(FrameSpec::Frenet) | None) {
                    self.fail("frame", "profile", "surfaces have a single normal; frame profiles do not apply");
                }
            }
        }
        if let Some(s) = solver {
            if s.eps_list.is_some() {
                let strip = matches!(tr, TransverseSpec::Strip { .. });
                let twisted = matches!(tr, TransverseSpec::Harmonic { .. })
                    && matches!(g, GeometrySpec::Curve { family: CurveFamily::Line { periodic: true, .. }, .. });
                if !strip && !twisted {
                    self.fail(
                        "solver",
                        "eps_list",
                        "needs a reference solver: a strip around a planar curve, or a harmonic tube on a periodic line",
                    );
                }
            }
        }
    }
}
