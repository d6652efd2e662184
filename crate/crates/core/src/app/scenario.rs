//! Scenario files (`hyperkin-scenario/1`, TOML) and the built-in catalog.
//!
//! ```toml
//! schema = "hyperkin-scenario/1"        # optional
//! name = "balloon"
//! description = "..."                   # optional
//! coords = ["u", "v"]
//! components = ["t*cos(u)*sin(2*v)", "t*sin(u)*sin(2*v)", "2*t*sin(v)^2"]
//! t0 = 1.0                              # default 1
//! domain = [[0, "2*pi"], [0, "pi/2"]]   # numbers or constant expressions
//! grid = [17, 17]                       # default 17 per axis
//! exclusions = ["sin(2*v)"]             # point skipped where |e| < exclusion_tol
//! exclusion_tol = 1e-3
//! shrink = 0.05                         # fraction trimmed from each domain end
//! tau_probes = [0.5, 1.0]               # optional offsets for g_t(t0 + δ)
//!
//! [ambient]
//! kind = "euclidean"                    # or "metric" with metric = [["1/x2^2", "0"], ...]
//! ```

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ambient::{AmbientKind, AmbientSpec};
use crate::expr::{eval_f64, parse_str, Expr};
use crate::surface::{MotionSpec, DEFAULT_EXCLUSION_TOL};
use crate::{Error, Result};

pub const SCHEMA: &str = "hyperkin-scenario/1";
pub const DEFAULT_GRID: usize = 17;
pub const DEFAULT_SHRINK: f64 = 0.05;

const BUILTIN: [(&str, &str); 9] = [
    ("balloon", include_str!("../../scenarios/balloon.toml")),
    ("cylinder-unroll", include_str!("../../scenarios/cylinder-unroll.toml")),
    ("parallel-sphere", include_str!("../../scenarios/parallel-sphere.toml")),
    ("parallel-ellipsoid", include_str!("../../scenarios/parallel-ellipsoid.toml")),
    ("rigid-translation", include_str!("../../scenarios/rigid-translation.toml")),
    ("sphere-killing-rotation", include_str!("../../scenarios/sphere-killing-rotation.toml")),
    ("hyperbolic-circle", include_str!("../../scenarios/hyperbolic-circle.toml")),
    ("normal-motion-vn-u", include_str!("../../scenarios/normal-motion-vn-u.toml")),
    ("conformal-ambient", include_str!("../../scenarios/conformal-ambient.toml")),
];

/// Sampling plan of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub counts: Vec<usize>,
    pub t0: f64,
    pub shrink: f64,
    pub tau_probes: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub motion: MotionSpec,
    pub grid: GridSpec,
}

/// Material points of a grid, ordered with the last coordinate fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub index: Vec<usize>,
    pub x: Vec<f64>,
}

impl Scenario {
    /// Sample positions along each axis after trimming `shrink` of the width
    /// from both ends.
    pub fn axes(&self, counts: &[usize]) -> Result<Vec<Vec<f64>>> {
        let m = self.motion.m();
        if counts.len() != m {
            return Err(Error::DimensionMismatch { what: "grid".into(), expected: m, got: counts.len() });
        }
        counts
            .iter()
            .zip(self.motion.domain())
            .enumerate()
            .map(|(i, (&n, &(lo, hi)))| {
                if n == 0 {
                    return Err(Error::validation(format!("grid[{}]", i + 1), "sample count must be positive"));
                }
                let pad = self.grid.shrink * (hi - lo);
                let (a, b) = (lo + pad, hi - pad);
                Ok(if n == 1 { vec![0.5 * (a + b)] } else { (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect() })
            })
            .collect()
    }

    pub fn points(&self, counts: &[usize]) -> Result<Vec<GridPoint>> {
        let axes = self.axes(counts)?;
        let ranges = axes.iter().map(|a| 0..a.len());
        Ok(itertools::Itertools::multi_cartesian_product(ranges)
            .map(|index| {
                let x = index.iter().zip(&axes).map(|(&k, a)| a[k]).collect();
                GridPoint { index, x }
            })
            .collect())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    schema: Option<String>,
    name: String,
    #[serde(default)]
    description: String,
    coords: Vec<String>,
    components: Vec<String>,
    #[serde(default = "default_t0")]
    t0: f64,
    domain: Vec<[Bound; 2]>,
    grid: Option<Vec<usize>>,
    #[serde(default)]
    exclusions: Vec<String>,
    exclusion_tol: Option<f64>,
    shrink: Option<f64>,
    #[serde(default)]
    tau_probes: Vec<f64>,
    ambient: AmbientFile,
}

fn default_t0() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Bound {
    Num(f64),
    Expr(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AmbientFile {
    kind: String,
    dim: Option<usize>,
    metric: Option<Vec<Vec<String>>>,
}

/// Every built-in scenario, in catalog order.
pub fn builtin_scenarios() -> Vec<Scenario> {
    BUILTIN
        .iter()
        .map(|(name, src)| parse_scenario(src, &format!("<builtin:{name}>")).expect("built-in scenarios are valid"))
        .collect()
}

pub fn builtin_names() -> Vec<&'static str> {
    BUILTIN.iter().map(|(n, _)| *n).collect()
}

pub fn builtin(name: &str) -> Result<Scenario> {
    let (_, src) = BUILTIN.iter().find(|(n, _)| *n == name).ok_or_else(|| Error::UnknownScenario(name.to_string()))?;
    parse_scenario(src, &format!("<builtin:{name}>"))
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let src = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_scenario(&src, &path.display().to_string())
}

/// Parses and fully validates a scenario document; `origin` names it in errors.
pub fn parse_scenario(src: &str, origin: &str) -> Result<Scenario> {
    let file: ScenarioFile = toml::from_str(src).map_err(|e| {
        let message = match e.span() {
            Some(span) => {
                let (line, col) = line_col(src, span.start);
                format!("line {line}, column {col}: {}", e.message())
            }
            None => e.message().to_string(),
        };
        Error::ScenarioParse { path: origin.to_string(), message }
    })?;
    build(file)
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |p| before.len() - p - 1) + 1;
    (line, col)
}

fn parse_field(src: &str, field: &str) -> Result<Expr> {
    parse_str(src).map_err(|e| Error::validation(field, format!("{e} in `{src}`")))
}

fn constant(b: &Bound, field: &str) -> Result<f64> {
    match b {
        Bound::Num(v) => Ok(*v),
        Bound::Expr(s) => eval_f64(&parse_field(s, field)?, &HashMap::new()).map_err(|e| Error::validation(field, e.to_string())),
    }
}

fn build(f: ScenarioFile) -> Result<Scenario> {
    if let Some(schema) = &f.schema {
        if schema != SCHEMA {
            return Err(Error::validation("schema", format!("expected `{SCHEMA}`, got `{schema}`")));
        }
    }
    if f.name.trim().is_empty() {
        return Err(Error::validation("name", "must not be empty"));
    }
    let m = f.coords.len();
    let components =
        f.components.iter().enumerate().map(|(i, c)| parse_field(c, &format!("components[{}]", i + 1))).collect::<Result<Vec<_>>>()?;
    let ambient = match f.ambient.kind.as_str() {
        "euclidean" => {
            if f.ambient.metric.is_some() {
                return Err(Error::validation("ambient.metric", "only allowed with kind = \"metric\""));
            }
            AmbientSpec::euclidean(f.ambient.dim.unwrap_or(m + 1))?
        }
        "metric" => {
            let rows = f.ambient.metric.as_ref().ok_or_else(|| Error::validation("ambient.metric", "required with kind = \"metric\""))?;
            let entries = rows
                .iter()
                .enumerate()
                .map(|(a, row)| {
                    row.iter().enumerate().map(|(b, s)| parse_field(s, &format!("ambient.metric[{}][{}]", a + 1, b + 1))).collect()
                })
                .collect::<Result<Vec<Vec<_>>>>()?;
            let spec = AmbientSpec::metric(entries)?;
            if let Some(d) = f.ambient.dim {
                if d != spec.dim() {
                    return Err(Error::DimensionMismatch { what: "ambient.dim".into(), expected: spec.dim(), got: d });
                }
            }
            spec
        }
        other => return Err(Error::validation("ambient.kind", format!("expected `euclidean` or `metric`, got `{other}`"))),
    };
    let domain = f
        .domain
        .iter()
        .enumerate()
        .map(|(i, [lo, hi])| {
            let field = format!("domain[{}]", i + 1);
            Ok((constant(lo, &field)?, constant(hi, &field)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let exclusions =
        f.exclusions.iter().enumerate().map(|(i, e)| parse_field(e, &format!("exclusions[{}]", i + 1))).collect::<Result<Vec<_>>>()?;
    let motion = MotionSpec::new(f.coords, components, ambient)?
        .with_domain(domain)?
        .with_exclusions(exclusions, f.exclusion_tol.unwrap_or(DEFAULT_EXCLUSION_TOL))?;
    if !f.t0.is_finite() {
        return Err(Error::validation("t0", "must be finite"));
    }
    let shrink = f.shrink.unwrap_or(DEFAULT_SHRINK);
    if !(0.0..0.5).contains(&shrink) {
        return Err(Error::validation("shrink", format!("must lie in [0, 0.5), got {shrink}")));
    }
    let counts = f.grid.unwrap_or_else(|| vec![DEFAULT_GRID; m]);
    if counts.len() != m {
        return Err(Error::DimensionMismatch { what: "grid".into(), expected: m, got: counts.len() });
    }
    if let Some(i) = counts.iter().position(|&n| n == 0) {
        return Err(Error::validation(format!("grid[{}]", i + 1), "sample count must be positive"));
    }
    if let Some(p) = f.tau_probes.iter().find(|p| !p.is_finite()) {
        return Err(Error::validation("tau_probes", format!("must be finite, got {p}")));
    }
    Ok(Scenario {
        name: f.name,
        description: f.description,
        motion,
        grid: GridSpec { counts, t0: f.t0, shrink, tau_probes: f.tau_probes },
    })
}

/// Plain-data echo of a scenario for reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioEcho {
    pub name: String,
    pub description: String,
    pub coords: Vec<String>,
    pub components: Vec<String>,
    pub ambient: AmbientEcho,
    pub domain: Vec<[f64; 2]>,
    pub exclusions: Vec<String>,
    pub exclusion_tol: f64,
    pub grid: GridSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmbientEcho {
    pub kind: &'static str,
    pub dim: usize,
    pub metric: Option<Vec<Vec<String>>>,
}

impl ScenarioEcho {
    pub fn new(s: &Scenario) -> Self {
        let m = &s.motion;
        let ambient = match m.ambient().kind() {
            AmbientKind::Euclidean => AmbientEcho { kind: "euclidean", dim: m.ambient().dim(), metric: None },
            AmbientKind::Metric(rows) => AmbientEcho {
                kind: "metric",
                dim: m.ambient().dim(),
                metric: Some(rows.iter().map(|r| r.iter().map(ToString::to_string).collect()).collect()),
            },
        };
        Self {
            name: s.name.clone(),
            description: s.description.clone(),
            coords: m.coords().to_vec(),
            components: m.components().iter().map(ToString::to_string).collect(),
            ambient,
            domain: m.domain().iter().map(|&(a, b)| [a, b]).collect(),
            exclusions: m.exclusions().iter().map(ToString::to_string).collect(),
            exclusion_tol: m.exclusion_tol(),
            grid: s.grid.clone(),
        }
    }
}
