//! Shared fixtures for the benchmarks.

use hyperkin::app::scenario::builtin;
use hyperkin::{parse_str, Expr, Scenario};

/// Balloon component, a representative trigonometric product.
pub const BALLOON_X: &str = "t*cos(u)*sin(2*v)";

/// A deeper expression mixing every elementary function.
pub const MIXED: &str = "exp(0.3*u - 0.2*v^2)*sqrt(1 + u^2 + t^2) + log(2 + sin(u*v)) - tan(0.1*t*u)/(1 + cos(v)^2)";

pub fn expr(src: &str) -> Expr {
    parse_str(src).expect("benchmark expression parses")
}

pub fn scenario(name: &str) -> Scenario {
    builtin(name).expect("built-in scenario")
}
