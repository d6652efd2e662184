//! Kinematics of moving hypersurfaces in a Riemannian chart.
//!
//! Given a closed-form motion `φ(u¹..uᵐ, t)` of an m-dimensional hypersurface
//! inside an (m+1)-dimensional ambient chart, the crate computes the induced
//! geometry (fundamental forms, shape operator, connection, curvature), the
//! kinematics of the motion (velocity split, velocity gradient, stretching,
//! rotation rate, δg, δn) and the variation of the Levi-Civita connection δ∇
//! by several independent routes. A grid runner folds the per-point results
//! into an infinitesimally affine / isometric verdict.
//!
//! All derivatives are exact, carried by the degree-3 jets in [`jet`].

pub mod ambient;
pub mod app;
pub mod expr;
pub mod jet;
pub mod kinematics;
pub mod surface;
pub mod tensor;
pub mod variation;

pub use ambient::{AmbientFrame, AmbientSpec};
pub use app::report::{Report, Verdict};
pub use app::runner::{run_grid, RunOptions};
pub use app::scenario::{builtin_scenarios, load_scenario, Scenario};
pub use expr::{parse_str, Expr, ExprError};
pub use jet::{Jet, JetError, VariableSet};
pub use kinematics::KinFrame;
pub use surface::{GeomFrame, MotionSpec};
pub use variation::{Route, VariationRecord};

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("ambient metric is not positive definite at x = {point:?} (leading minor {minor} = {value})")]
    NotPositiveDefinite { point: Vec<f64>, minor: usize, value: f64 },
    #[error("ambient metric is not symmetric: entry ({row},{col}) differs from ({col},{row}) by {diff}")]
    AsymmetricMetric { row: usize, col: usize, diff: f64 },
    #[error("singular metric")]
    SingularMetric,
    #[error("degenerate frame: det g = {det}")]
    DegenerateFrame { det: f64 },
    #[error("degenerate frame: generalized cross product vanishes")]
    ZeroNormal,
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch { what: String, expected: usize, got: usize },
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },
    #[error("{path}: {message}")]
    ScenarioParse { path: String, message: String },
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("no valid grid points: {0}")]
    EmptyGrid(String),
    #[error("misuse: {0}")]
    Misuse(String),
    #[error("report serialization: {0}")]
    Serialize(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation { field: field.into(), message: message.into() }
    }
}
