//! Ambient geometry in a single chart: metric ḡ, Christoffel symbols Γ̄ and
//! curvature R̄.
//!
//! Ambient quantities are first built as jets over the ambient coordinates
//! `x1..xn` at the point of interest and then pulled back along the motion
//! with a [`Composer`], so surface formulas can differentiate through them.

use std::sync::Arc;

use ndarray::{s, Array2, Array3, Array4};

use crate::expr::{eval_jet, free_vars, Expr, JetEnv};
use crate::jet::{seed, Composer, Jet, VariableSet};
use crate::tensor;
use crate::{Error, Result};

/// Relative tolerance for the pointwise symmetry check on metric entries.
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub enum AmbientKind {
    Euclidean,
    /// Metric entries as expressions in `x1..xn`, row-major.
    Metric(Vec<Vec<Expr>>),
}

#[derive(Debug, Clone)]
pub struct AmbientSpec {
    dim: usize,
    kind: AmbientKind,
    xvars: Arc<VariableSet>,
}

pub fn coord_names(dim: usize) -> Vec<String> {
    (1..=dim).map(|a| format!("x{a}")).collect()
}

impl AmbientSpec {
    pub fn euclidean(dim: usize) -> Result<Self> {
        Ok(Self { dim, kind: AmbientKind::Euclidean, xvars: VariableSet::new(coord_names(dim))? })
    }

    /// A metric given entrywise. Free variables must be among `x1..xn`.
    pub fn metric(entries: Vec<Vec<Expr>>) -> Result<Self> {
        let dim = entries.len();
        let names = coord_names(dim);
        let allowed: Vec<&str> = names.iter().map(String::as_str).collect();
        for (a, row) in entries.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { what: format!("ambient.metric row {}", a + 1), expected: dim, got: row.len() });
            }
            for (b, e) in row.iter().enumerate() {
                if let Some(bad) = free_vars(e).into_iter().find(|v| !allowed.contains(&v.as_str())) {
                    return Err(Error::validation(
                        format!("ambient.metric[{}][{}]", a + 1, b + 1),
                        format!("variable `{bad}` is not an ambient coordinate (allowed: {})", allowed.join(",")),
                    ));
                }
            }
        }
        Ok(Self { dim, kind: AmbientKind::Metric(entries), xvars: VariableSet::new(names)? })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &AmbientKind {
        &self.kind
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.kind, AmbientKind::Euclidean)
    }

    /// Jet variable set `x1..xn`.
    pub fn vars(&self) -> &Arc<VariableSet> {
        &self.xvars
    }
}

/// Metric and inverse at one ambient point, as jets over whatever variables
/// the point jets carry.
#[derive(Debug, Clone)]
pub struct AmbientFrame {
    pub metric: Array2<Jet>,
    pub inverse: Array2<Jet>,
}

/// ḡ_ab evaluated at the ambient point `x` (one jet per coordinate).
pub fn ambient_metric_at(spec: &AmbientSpec, x: &[Jet]) -> Result<Array2<Jet>> {
    if x.len() != spec.dim {
        return Err(Error::DimensionMismatch { what: "ambient point".into(), expected: spec.dim, got: x.len() });
    }
    let vars = x[0].vars().clone();
    let entries = match &spec.kind {
        AmbientKind::Euclidean => return Ok(tensor::identity(&vars, spec.dim)),
        AmbientKind::Metric(entries) => entries,
    };
    let mut env = JetEnv::new(&vars);
    for (name, j) in spec.xvars.names().iter().zip(x) {
        env.bind(name.clone(), j.clone())?;
    }
    let mut g = tensor::zeros2(&vars, spec.dim, spec.dim);
    for a in 0..spec.dim {
        for b in 0..spec.dim {
            g[[a, b]] = eval_jet(&entries[a][b], &env)?;
        }
    }
    let gv = tensor::values(&g);
    for a in 0..spec.dim {
        for b in a + 1..spec.dim {
            let diff = (gv[[a, b]] - gv[[b, a]]).abs();
            if diff > SYMMETRY_TOL * (1.0 + gv[[a, b]].abs()) {
                return Err(Error::AsymmetricMetric { row: a + 1, col: b + 1, diff });
            }
        }
    }
    for k in 1..=spec.dim {
        let minor = tensor::det_values(&gv.slice(s![..k, ..k]).to_owned());
        if minor <= 0.0 {
            return Err(Error::NotPositiveDefinite { point: x.iter().map(Jet::value).collect(), minor: k, value: minor });
        }
    }
    Ok(g)
}

pub fn ambient_frame(spec: &AmbientSpec, x: &[Jet]) -> Result<AmbientFrame> {
    let metric = ambient_metric_at(spec, x)?;
    let inverse = tensor::inverse(&metric).map_err(|_| Error::SingularMetric)?;
    Ok(AmbientFrame { metric, inverse })
}

/// Γ̄ᵃ_bc by the Koszul formula. The frame must be expressed over the ambient
/// coordinates themselves (jet variable `a` is `xᵃ`).
pub fn ambient_christoffels(frame: &AmbientFrame) -> Array3<Jet> {
    tensor::christoffel(&frame.metric, &frame.inverse)
}

/// R̄ᵃ_bcd and R̄♭_abcd as values at the frame point.
pub fn ambient_curvature(frame: &AmbientFrame, gamma: &Array3<Jet>) -> (Array4<f64>, Array4<f64>) {
    let r = tensor::values(&tensor::riemann(gamma));
    let flat = tensor::lower_riemann(&r, &tensor::values(&frame.metric));
    (r, flat)
}

/// Everything about the ambient space at one point, over `x1..xn`.
#[derive(Debug, Clone)]
pub struct AmbientPoint {
    pub frame: AmbientFrame,
    pub christoffel: Array3<Jet>,
    pub curvature: Array4<f64>,
    pub curvature_flat: Array4<f64>,
}

pub fn ambient_point(spec: &AmbientSpec, x0: &[f64]) -> Result<AmbientPoint> {
    let x = seed(&spec.xvars, x0)?;
    let frame = ambient_frame(spec, &x)?;
    let christoffel = ambient_christoffels(&frame);
    let (curvature, curvature_flat) = ambient_curvature(&frame, &christoffel);
    Ok(AmbientPoint { frame, christoffel, curvature, curvature_flat })
}

/// Ambient fields along the motion, as jets over the material variables.
#[derive(Debug, Clone)]
pub struct Pullback {
    pub metric: Array2<Jet>,
    pub inverse: Array2<Jet>,
    pub christoffel: Array3<Jet>,
    pub curvature: Array4<f64>,
    pub curvature_flat: Array4<f64>,
}

/// Pulls ḡ, ḡ⁻¹ and Γ̄ back along `phi`; curvature is evaluated at φ's value.
pub fn pull_back(spec: &AmbientSpec, phi: &[Jet]) -> Result<Pullback> {
    let n = spec.dim;
    let vars = phi[0].vars().clone();
    if spec.is_euclidean() {
        return Ok(Pullback {
            metric: tensor::identity(&vars, n),
            inverse: tensor::identity(&vars, n),
            christoffel: tensor::zeros3(&vars, n),
            curvature: Array4::zeros((n, n, n, n)),
            curvature_flat: Array4::zeros((n, n, n, n)),
        });
    }
    let x0: Vec<f64> = phi.iter().map(Jet::value).collect();
    let at = ambient_point(spec, &x0)?;
    let composer = Composer::new(phi, n)?;
    let christoffel = at.christoffel.map(|j| composer.compose(j)).into_iter().collect::<Result<Vec<_>, _>>()?;
    let christoffel = Array3::from_shape_vec((n, n, n), christoffel).expect("shape");
    let metric = ambient_metric_at(spec, phi)?;
    let inverse = tensor::inverse(&metric).map_err(|_| Error::SingularMetric)?;
    Ok(Pullback { metric, inverse, christoffel, curvature: at.curvature, curvature_flat: at.curvature_flat })
}

/// Largest violation of `R♭_abcd = −R♭_bacd` and `R♭_abcd = −R♭_abdc`.
pub fn pair_antisymmetry_residual(flat: &Array4<f64>) -> f64 {
    let d = flat.shape()[0];
    let mut worst = 0.0_f64;
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    worst = worst.max((flat[[a, b, c, e]] + flat[[b, a, c, e]]).abs());
                    worst = worst.max((flat[[a, b, c, e]] + flat[[a, b, e, c]]).abs());
                }
            }
        }
    }
    worst
}

/// Largest violation of `Rᵃ_bcd + Rᵃ_cdb + Rᵃ_dbc = 0`.
pub fn bianchi_residual(r: &Array4<f64>) -> f64 {
    let d = r.shape()[0];
    let mut worst = 0.0_f64;
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    worst = worst.max((r[[a, b, c, e]] + r[[a, c, e, b]] + r[[a, e, b, c]]).abs());
                }
            }
        }
    }
    worst
}
