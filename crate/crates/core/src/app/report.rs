//! Report document (`hyperkin-report/1`) and its JSON and CSV emitters.
//!
//! JSON is written with sorted keys, two-space indentation and floats in
//! `%.17g` form, so identical runs give identical bytes and every float
//! reads back bit-exactly. Non-finite floats become `null`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::app::scenario::ScenarioEcho;
use crate::variation::{Route, Tolerances};
use crate::{Error, Result};

pub use crate::variation::{ClassFlags, Verdict};

pub const SCHEMA: &str = "hyperkin-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    CsvSummary,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv-summary" => Ok(Format::CsvSummary),
            _ => Err(format!("unknown format `{s}` (expected json or csv-summary)")),
        }
    }
}

/// Residuals of the pointwise identities; the aggregate holds their maxima.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Checks {
    /// `|δ∇ᵏᵢⱼ − δ∇ᵏⱼᵢ|` over applicable routes.
    pub connection_symmetry: f64,
    /// Chart `𝒟` from the kinematic and Cauchy–Green routes against the metric route.
    pub stretching_routes: f64,
    /// `δg − 2𝒟♭` with 𝒟♭ built from δg.
    pub metric_rate_construction: f64,
    /// `δg` against twice the flattened kinematic and Cauchy–Green stretching.
    pub metric_rate_routes: f64,
    pub velocity_split: f64,
    pub rotation_antisymmetry: f64,
    /// `Wn` against `∂ₜn + Γ̄(v, n)`.
    pub normal_variation: f64,
    pub gauss: f64,
    pub codazzi: f64,
    /// Gap between the ambient and Euclidean normal forms against the
    /// curvature term that separates them.
    pub codazzi_rearrangement: f64,
    /// Chart formula of `£_{v∥}∇` against the bracket formula.
    pub lie_bracket: f64,
    pub unit_normal: f64,
    pub weingarten: f64,
    pub fd: Option<FdChecks>,
}

/// Finite-difference oracle residuals.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FdChecks {
    pub metric_rate: f64,
    pub normal_variation: f64,
    pub connection: f64,
}

impl Checks {
    pub fn max(&self, o: &Checks) -> Checks {
        Checks {
            connection_symmetry: self.connection_symmetry.max(o.connection_symmetry),
            stretching_routes: self.stretching_routes.max(o.stretching_routes),
            metric_rate_construction: self.metric_rate_construction.max(o.metric_rate_construction),
            metric_rate_routes: self.metric_rate_routes.max(o.metric_rate_routes),
            velocity_split: self.velocity_split.max(o.velocity_split),
            rotation_antisymmetry: self.rotation_antisymmetry.max(o.rotation_antisymmetry),
            normal_variation: self.normal_variation.max(o.normal_variation),
            gauss: self.gauss.max(o.gauss),
            codazzi: self.codazzi.max(o.codazzi),
            codazzi_rearrangement: self.codazzi_rearrangement.max(o.codazzi_rearrangement),
            lie_bracket: self.lie_bracket.max(o.lie_bracket),
            unit_normal: self.unit_normal.max(o.unit_normal),
            weingarten: self.weingarten.max(o.weingarten),
            fd: match (&self.fd, &o.fd) {
                (Some(a), Some(b)) => Some(FdChecks {
                    metric_rate: a.metric_rate.max(b.metric_rate),
                    normal_variation: a.normal_variation.max(b.normal_variation),
                    connection: a.connection.max(b.connection),
                }),
                (a, b) => a.clone().or_else(|| b.clone()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauMetric {
    pub offset: f64,
    pub g: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRecord {
    /// Flat grid index, last coordinate fastest.
    pub point: usize,
    pub index: Vec<usize>,
    pub coords: Vec<f64>,
    pub g: Vec<Vec<f64>>,
    /// `Γᵏᵢⱼ` as `[k][i][j]`.
    pub christoffel: Vec<Vec<Vec<f64>>>,
    /// Magnitudes of the principal curvatures, ascending.
    pub principal_curvatures_abs: Vec<f64>,
    pub v_n: f64,
    pub v_par_norm: f64,
    pub grad_v_n_norm: f64,
    /// Chart stretching `𝒟ⁱⱼ`.
    pub stretching: Vec<Vec<f64>>,
    pub stretching_flat: Vec<Vec<f64>>,
    pub d_norm: f64,
    pub nabla_d_norm: f64,
    pub delta_connection_norm: f64,
    pub lie_norm: f64,
    /// `δ∇ᵏᵢⱼ` as `[k][i][j]` for each applicable route.
    pub delta_connection: BTreeMap<Route, Vec<Vec<Vec<f64>>>>,
    /// Normalized residual for each applicable route pair `a~b`.
    pub route_residuals: BTreeMap<String, f64>,
    pub max_route_residual: f64,
    pub checks: Checks,
    pub tau_metrics: Vec<TauMetric>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedPoint {
    pub point: usize,
    pub index: Vec<usize>,
    pub coords: Vec<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregates {
    pub points_total: usize,
    pub points_valid: usize,
    pub points_skipped: usize,
    pub sup_d: f64,
    pub sup_nabla_d: f64,
    pub sup_delta_connection: f64,
    pub sup_lie: f64,
    pub max_v_n_abs: f64,
    pub max_v_par_norm: f64,
    pub max_grad_v_n_norm: f64,
    /// Routes compared on this grid.
    pub routes: Vec<Route>,
    pub max_route_residual: f64,
    pub worst_route_pair: Option<[Route; 2]>,
    pub checks: Checks,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub scenario: ScenarioEcho,
    pub t: f64,
    pub grid: Vec<usize>,
    pub tolerances: Tolerances,
    pub fd_validate: bool,
    pub points: Vec<PointRecord>,
    pub skipped: Vec<SkippedPoint>,
    pub aggregates: Aggregates,
    pub verdict: Verdict,
}

impl Report {
    pub fn to_value(&self) -> Result<Value> {
        serde_json::to_value(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        let mut out = String::new();
        write_value(&mut out, &self.to_value()?, 0);
        out.push('\n');
        Ok(out)
    }

    /// One row per grid point, valid or skipped, with aggregate columns.
    pub fn to_csv(&self) -> Result<String> {
        let ser = |e: csv::Error| Error::Serialize(e.to_string());
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = vec!["point".into()];
        header.extend(self.scenario.coords.iter().map(|c| format!("i_{c}")));
        header.extend(self.scenario.coords.iter().cloned());
        header.extend(
            [
                "status",
                "reason",
                "v_n",
                "v_par_norm",
                "d_norm",
                "nabla_d_norm",
                "delta_connection_norm",
                "lie_norm",
                "max_route_residual",
                "gauss",
                "codazzi",
                "sup_d",
                "sup_nabla_d",
                "sup_delta_connection",
                "grid_max_route_residual",
                "affine",
                "isometric",
            ]
            .map(String::from),
        );
        w.write_record(&header).map_err(ser)?;
        let a = &self.aggregates;
        let tail = [
            format_g17(a.sup_d),
            format_g17(a.sup_nabla_d),
            format_g17(a.sup_delta_connection),
            format_g17(a.max_route_residual),
            self.verdict.affine.to_string(),
            self.verdict.isometric.to_string(),
        ];
        let (mut p, mut s) = (self.points.iter().peekable(), self.skipped.iter().peekable());
        loop {
            let take_point = match (p.peek(), s.peek()) {
                (Some(a), Some(b)) => a.point < b.point,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (None, None) => break,
            };
            let mut row: Vec<String>;
            if take_point {
                let r = p.next().expect("peeked");
                row = lead(r.point, &r.index, &r.coords);
                row.push("ok".into());
                row.push(String::new());
                row.extend(
                    [
                        r.v_n,
                        r.v_par_norm,
                        r.d_norm,
                        r.nabla_d_norm,
                        r.delta_connection_norm,
                        r.lie_norm,
                        r.max_route_residual,
                        r.checks.gauss,
                        r.checks.codazzi,
                    ]
                    .map(format_g17),
                );
            } else {
                let r = s.next().expect("peeked");
                row = lead(r.point, &r.index, &r.coords);
                row.push("skipped".into());
                row.push(r.reason.clone());
                row.extend(std::iter::repeat(String::new()).take(9));
            }
            row.extend(tail.iter().cloned());
            w.write_record(&row).map_err(ser)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Serialize(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => self.to_json(),
            Format::CsvSummary => self.to_csv(),
        }
    }
}

fn lead(point: usize, index: &[usize], coords: &[f64]) -> Vec<String> {
    let mut row = vec![point.to_string()];
    row.extend(index.iter().map(ToString::to_string));
    row.extend(coords.iter().map(|&x| format_g17(x)));
    row
}

/// Writes `report` to `path` in the requested format.
pub fn emit_report(report: &Report, format: Format, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = report.render(format)?;
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// C's `%.17g`.
pub fn format_g17(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        strip_zeros(format!("{x:.*}", (16 - exp) as usize))
    } else {
        format!("{}e{}{:02}", strip_zeros(mant.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn strip_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    let pad = |out: &mut String, d: usize| out.extend(std::iter::repeat("  ").take(d));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => out.push_str(&format_g17(x)),
            _ => write!(out, "{n}").expect("string write"),
        },
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) if items.iter().all(|i| !i.is_object() && !i.is_array()) => {
            out.push('[');
            for (k, i) in items.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_value(out, i, depth);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (k, i) in items.iter().enumerate() {
                pad(out, depth + 1);
                write_value(out, i, depth + 1);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (k, key) in keys.iter().enumerate() {
                pad(out, depth + 1);
                out.push_str(&Value::String((*key).clone()).to_string());
                out.push_str(": ");
                write_value(out, &map[*key], depth + 1);
                out.push_str(if k + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push('}');
        }
    }
}
