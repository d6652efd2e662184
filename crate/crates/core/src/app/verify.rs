//! The invariant suite run by `verify`: every identity the pipeline is
//! expected to satisfy, with its grid-maximum residual and tolerance.

use serde::Serialize;

use crate::app::report::Report;

/// Threshold for the metric-rate construction identity, which holds to
/// rounding.
pub const TOL_CONSTRUCTION: f64 = 1e-12;
pub const TOL_SYMMETRY: f64 = 1e-8;
pub const TOL_STRETCHING: f64 = 1e-8;
pub const TOL_METRIC_RATE: f64 = 1e-9;
pub const TOL_SPLIT: f64 = 1e-10;
pub const TOL_ROTATION: f64 = 1e-8;
pub const TOL_NORMAL_VARIATION: f64 = 1e-7;
pub const TOL_STRUCTURE: f64 = 1e-8;
pub const TOL_FRAME: f64 = 1e-10;
/// Finite-difference oracle; the truncation error of the Richardson step
/// is far below this.
pub const TOL_FD: f64 = 1e-6;
/// Threshold shared by the two affine criteria compared in `affine_criteria_agree`.
pub const TOL_AFFINE_CRITERIA: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &'static str, residual: f64, tolerance: f64) -> Self {
        // NaN fails.
        Self { name, residual, tolerance, passed: residual <= tolerance }
    }
}

pub fn invariant_suite(report: &Report) -> Vec<Check> {
    let a = &report.aggregates;
    let c = &a.checks;
    let mut out = vec![
        Check::new("route_agreement", a.max_route_residual, report.tolerances.route),
        Check::new("connection_symmetry", c.connection_symmetry, TOL_SYMMETRY),
        Check::new("stretching_routes", c.stretching_routes, TOL_STRETCHING),
        Check::new("metric_rate_construction", c.metric_rate_construction, TOL_CONSTRUCTION),
        Check::new("metric_rate_routes", c.metric_rate_routes, TOL_METRIC_RATE),
        Check::new("velocity_split", c.velocity_split, TOL_SPLIT),
        Check::new("rotation_antisymmetry", c.rotation_antisymmetry, TOL_ROTATION),
        Check::new("normal_variation", c.normal_variation, TOL_NORMAL_VARIATION),
        Check::new("gauss", c.gauss, TOL_STRUCTURE),
        Check::new("codazzi", c.codazzi, TOL_STRUCTURE),
        Check::new("codazzi_rearrangement", c.codazzi_rearrangement, TOL_STRUCTURE),
        Check::new("lie_bracket", c.lie_bracket, TOL_STRUCTURE),
        Check::new("unit_normal", c.unit_normal, TOL_FRAME),
        Check::new("weingarten", c.weingarten, TOL_STRUCTURE),
    ];
    let by_connection = a.sup_delta_connection < TOL_AFFINE_CRITERIA;
    let by_stretching = a.sup_nabla_d < TOL_AFFINE_CRITERIA;
    out.push(Check::new("affine_criteria_agree", if by_connection == by_stretching { 0.0 } else { 1.0 }, 0.0));
    if let Some(fd) = &c.fd {
        out.push(Check::new("fd_metric_rate", fd.metric_rate, TOL_FD));
        out.push(Check::new("fd_normal_variation", fd.normal_variation, TOL_NORMAL_VARIATION));
        out.push(Check::new("fd_connection", fd.connection, TOL_FD));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::app::runner::{run_grid, RunOptions};
    use crate::app::scenario::builtin;

    #[test]
    fn cylinder_passes_with_fd() {
        let s = builtin("cylinder-unroll").unwrap();
        let r = run_grid(&s, &RunOptions { grid: Some(vec![4, 3]), fd_validate: true, ..Default::default() }).unwrap();
        let checks = invariant_suite(&r);
        assert!(checks.iter().any(|c| c.name == "fd_connection"));
        for c in &checks {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn nan_fails() {
        assert!(!Check::new("x", f64::NAN, 1.0).passed);
    }
}
