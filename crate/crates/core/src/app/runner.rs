//! Grid runner: surface → kinematics → variation at every grid point in
//! parallel, then a single-threaded reduce in grid order.

use std::collections::BTreeMap;

use ndarray::{Array2, Array3};
use rayon::prelude::*;

use crate::app::report::{Aggregates, Checks, FdChecks, PointRecord, Report, SkippedPoint, TauMetric, SCHEMA};
use crate::app::scenario::{GridPoint, Scenario, ScenarioEcho};
use crate::kinematics::{self, KinFrame, FD_STEP};
use crate::surface::{self, flat, GeomFrame};
use crate::tensor;
use crate::variation::{self, applicable_routes, Route, Tolerances, VariationRecord};
use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    /// Evaluation time; the scenario's `t0` when absent.
    pub t: Option<f64>,
    /// Samples per axis; the scenario's grid when absent.
    pub grid: Option<Vec<usize>>,
    pub tolerances: Tolerances,
    /// Adds the finite-difference oracle residuals to every point.
    pub fd_validate: bool,
}

struct Computed {
    base: PointRecord,
    var: VariationRecord,
    norms: variation::PointNorms,
}

enum Outcome {
    Valid(Box<Computed>),
    Skipped(String),
}

pub fn run_grid(scenario: &Scenario, options: &RunOptions) -> Result<Report> {
    let t = options.t.unwrap_or(scenario.grid.t0);
    if !t.is_finite() {
        return Err(Error::validation("t", "must be finite"));
    }
    let counts = options.grid.clone().unwrap_or_else(|| scenario.grid.counts.clone());
    let points = scenario.points(&counts)?;
    let outcomes: Vec<Outcome> = points
        .par_iter()
        .enumerate()
        .map(|(k, p)| match evaluate(scenario, p, k, t, options.fd_validate) {
            Ok(c) => Outcome::Valid(Box::new(c)),
            Err(reason) => Outcome::Skipped(reason),
        })
        .collect();

    let mut valid = Vec::new();
    let mut skipped = Vec::new();
    for (k, (p, o)) in points.iter().zip(outcomes).enumerate() {
        match o {
            Outcome::Valid(c) => valid.push(*c),
            Outcome::Skipped(reason) => skipped.push(SkippedPoint { point: k, index: p.index.clone(), coords: p.x.clone(), reason }),
        }
    }
    if valid.is_empty() {
        return Err(Error::EmptyGrid(format!("all {} points of `{}` were excluded or degenerate", points.len(), scenario.name)));
    }

    let norms: Vec<_> = valid.iter().map(|c| c.norms).collect();
    let verdict = variation::classify(&norms, &options.tolerances)?;
    let euclidean = scenario.motion.ambient().is_euclidean();
    let routes = applicable_routes(verdict.flags, euclidean);

    let mut records = Vec::with_capacity(valid.len());
    let mut checks = Checks::default();
    let mut worst: (f64, Option<(Route, Route)>) = (0.0, None);
    for c in valid {
        let Computed { mut base, var, .. } = c;
        let mut residuals = BTreeMap::new();
        for (a, ra) in routes.iter().enumerate() {
            for rb in &routes[a + 1..] {
                let r = tensor::rel_residual(&var.routes[ra], &var.routes[rb]);
                residuals.insert(format!("{ra}~{rb}"), r);
                if r > worst.0 || worst.1.is_none() {
                    worst = (r, Some((*ra, *rb)));
                }
            }
        }
        base.max_route_residual = residuals.values().copied().fold(0.0, f64::max);
        base.route_residuals = residuals;
        base.checks.connection_symmetry = var.symmetry_residual(&routes);
        base.delta_connection = routes.iter().map(|r| (*r, nested3(&var.routes[r]))).collect();
        checks = checks.max(&base.checks);
        records.push(base);
    }

    let sup = |f: fn(&variation::PointNorms) -> f64| norms.iter().map(f).fold(0.0, f64::max);
    let aggregates = Aggregates {
        points_total: points.len(),
        points_valid: records.len(),
        points_skipped: skipped.len(),
        sup_d: verdict.sup_d,
        sup_nabla_d: verdict.sup_nabla_d,
        sup_delta_connection: verdict.sup_delta_connection,
        sup_lie: sup(|p| p.lie_norm),
        max_v_n_abs: sup(|p| p.v_n_abs),
        max_v_par_norm: sup(|p| p.v_par_norm),
        max_grad_v_n_norm: sup(|p| p.grad_v_n_norm),
        routes,
        max_route_residual: worst.0,
        worst_route_pair: worst.1.map(|(a, b)| [a, b]),
        checks,
    };
    Ok(Report {
        schema: SCHEMA,
        scenario: ScenarioEcho::new(scenario),
        t,
        grid: counts,
        tolerances: options.tolerances,
        fd_validate: options.fd_validate,
        points: records,
        skipped,
        aggregates,
        verdict,
    })
}

/// Full pipeline at one point; an `Err` is the reason the point is skipped.
fn evaluate(scenario: &Scenario, p: &GridPoint, k: usize, t: f64, fd: bool) -> std::result::Result<Computed, String> {
    let spec = &scenario.motion;
    if let Some(i) = spec.excluded_by(&p.x, t).map_err(|e| e.to_string())? {
        return Err(format!("excluded: |{}| < {}", spec.exclusions()[i], spec.exclusion_tol()));
    }
    let inner = || -> Result<Computed> {
        let frame = GeomFrame::compute(spec, &p.x, t)?;
        let kin = KinFrame::compute(&frame)?;
        let var = VariationRecord::compute(&frame, &kin)?;
        let norms = variation::PointNorms::new(&frame, &kin, &var);
        let mut checks = point_checks(&frame, &kin, &var);
        if fd {
            checks.fd = Some(fd_checks(scenario, &frame, &kin, &var, &p.x, t)?);
        }
        let tau_metrics = scenario
            .grid
            .tau_probes
            .iter()
            .map(|&offset| Ok(TauMetric { offset, g: nested2(&kinematics::tau_metric(spec, &p.x, t + offset)?) }))
            .collect::<Result<Vec<_>>>()?;
        let mut kappa: Vec<f64> = frame.principal_curvatures().iter().map(|k| k.abs()).collect();
        kappa.sort_by(f64::total_cmp);
        let base = PointRecord {
            point: k,
            index: p.index.clone(),
            coords: p.x.clone(),
            g: nested2(&frame.g_values()),
            christoffel: nested3(&frame.gamma_values()),
            principal_curvatures_abs: kappa,
            v_n: kin.v_n.value(),
            v_par_norm: norms.v_par_norm,
            grad_v_n_norm: norms.grad_v_n_norm,
            stretching: nested2(&kin.d_values()),
            stretching_flat: nested2(&kin.d_flat_values()),
            d_norm: var.d_norm,
            nabla_d_norm: var.nabla_d_norm,
            delta_connection_norm: var.delta_norm,
            lie_norm: var.lie_norm,
            delta_connection: BTreeMap::new(),
            route_residuals: BTreeMap::new(),
            max_route_residual: 0.0,
            checks,
            tau_metrics,
        };
        Ok(Computed { base, var, norms })
    };
    inner().map_err(|e| e.to_string())
}

/// Pointwise identities that do not depend on the grid-level motion class.
pub fn point_checks(frame: &GeomFrame, kin: &KinFrame, var: &VariationRecord) -> Checks {
    let g = frame.g_values();
    let d = kin.d_values();
    let delta_g = tensor::values(&kin.delta_g);
    let twice = |a: &Array2<f64>| flat(a, &g) * 2.0;
    Checks {
        connection_symmetry: 0.0,
        stretching_routes: tensor::rel_residual(&kin.d_kinematic, &d).max(tensor::rel_residual(&kin.d_cauchy_green, &d)),
        metric_rate_construction: tensor::abs_residual(&delta_g, &(kin.d_flat_values() * 2.0)),
        metric_rate_routes: tensor::rel_residual(&delta_g, &twice(&kin.d_kinematic))
            .max(tensor::rel_residual(&delta_g, &twice(&kin.d_cauchy_green))),
        velocity_split: kinematics::split_residual(frame, kin),
        rotation_antisymmetry: kinematics::w_antisymmetry_residual(frame, kin),
        normal_variation: tensor::abs_residual(&kin.delta_n, &kin.delta_n_transport),
        gauss: tensor::max_abs(&surface::gauss_residual(frame)),
        codazzi: tensor::max_abs(&surface::codazzi_residual(frame)),
        codazzi_rearrangement: var.codazzi_rearrangement,
        lie_bracket: tensor::abs_residual(&var.lie, &var.lie_bracket),
        unit_normal: surface::normal_residual(frame),
        weingarten: surface::weingarten_residual(frame),
        fd: None,
    }
}

fn fd_checks(scenario: &Scenario, frame: &GeomFrame, kin: &KinFrame, var: &VariationRecord, x: &[f64], t: f64) -> Result<FdChecks> {
    let spec = &scenario.motion;
    let dg = kinematics::fd_delta_g(spec, x, t, FD_STEP)?;
    let dn = kinematics::fd_delta_normal(frame, spec, FD_STEP)?;
    let dc = variation::fd_delta_connection(spec, x, t, FD_STEP)?;
    Ok(FdChecks {
        metric_rate: tensor::rel_residual(&dg, &tensor::values(&kin.delta_g)),
        normal_variation: tensor::rel_residual(&dn, &kin.delta_n),
        connection: tensor::rel_residual(&dc, &var.routes[&Route::Definition]),
    })
}

pub(crate) fn nested2(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.outer_iter().map(|r| r.to_vec()).collect()
}

pub(crate) fn nested3(a: &Array3<f64>) -> Vec<Vec<Vec<f64>>> {
    a.outer_iter().map(|m| nested2(&m.to_owned())).collect()
}
