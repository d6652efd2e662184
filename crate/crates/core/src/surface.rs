//! Instantaneous geometry of the moving hypersurface at `(X, t)`.
//!
//! The material chart `u¹..uᵐ` doubles as the chart on every configuration,
//! so the deformation gradient `F` is simply the matrix of `u`-partials of φ
//! and the τ-dependent metric is the induced metric at time τ.
//!
//! Jets are over the variables `u¹..uᵐ, t` (time last). Headroom along the
//! pipeline: φ 3, F 2, g 2, n 2, B and S 1, Γ 1; curvature and covariant
//! derivatives of S, B are plain values.

use std::sync::Arc;

use itertools::Itertools;
use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, Array3, Array4};

use crate::ambient::{pull_back, AmbientSpec, Pullback};
use crate::expr::{eval_f64, eval_jet, free_vars, Expr, Func, JetEnv};
use crate::jet::{Jet, VariableSet};
use crate::tensor;
use crate::{Error, Result};

/// Name of the time variable in motion expressions.
pub const TIME: &str = "t";
/// Smallest admissible `det g`.
pub const TOL_SING: f64 = 1e-10;
pub const DEFAULT_EXCLUSION_TOL: f64 = 1e-3;

const RESERVED: [&str; 2] = [TIME, "pi"];

/// A closed-form motion `φᵃ(u¹..uᵐ, t)` together with its ambient space,
/// material domain and chart exclusions.
#[derive(Debug, Clone)]
pub struct MotionSpec {
    coords: Vec<String>,
    components: Vec<Expr>,
    ambient: AmbientSpec,
    domain: Vec<(f64, f64)>,
    exclusions: Vec<Expr>,
    exclusion_tol: f64,
    vars: Arc<VariableSet>,
}

impl MotionSpec {
    pub fn new(coords: Vec<String>, components: Vec<Expr>, ambient: AmbientSpec) -> Result<Self> {
        let m = coords.len();
        if !(1..=3).contains(&m) {
            return Err(Error::validation("coords", format!("surface dimension must be 1, 2 or 3, got {m}")));
        }
        for c in &coords {
            if RESERVED.contains(&c.as_str()) || Func::from_name(c).is_some() || c.starts_with('x') && c[1..].parse::<usize>().is_ok() {
                return Err(Error::validation("coords", format!("`{c}` is a reserved name")));
            }
        }
        if components.len() != m + 1 {
            return Err(Error::DimensionMismatch { what: "components".into(), expected: m + 1, got: components.len() });
        }
        if ambient.dim() != m + 1 {
            return Err(Error::DimensionMismatch { what: "ambient dimension".into(), expected: m + 1, got: ambient.dim() });
        }
        let mut names = coords.clone();
        names.push(TIME.to_string());
        let vars = VariableSet::new(names.clone()).map_err(|e| Error::validation("coords", e.to_string()))?;
        for (a, e) in components.iter().enumerate() {
            check_vars(e, &names, &format!("components[{}]", a + 1))?;
        }
        let domain = vec![(0.0, 1.0); m];
        Ok(Self { coords, components, ambient, domain, exclusions: Vec::new(), exclusion_tol: DEFAULT_EXCLUSION_TOL, vars })
    }

    pub fn with_domain(mut self, domain: Vec<(f64, f64)>) -> Result<Self> {
        if domain.len() != self.m() {
            return Err(Error::DimensionMismatch { what: "domain".into(), expected: self.m(), got: domain.len() });
        }
        for (i, &(lo, hi)) in domain.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::validation(format!("domain[{}]", i + 1), format!("need finite lo < hi, got [{lo}, {hi}]")));
            }
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn with_exclusions(mut self, exclusions: Vec<Expr>, tol: f64) -> Result<Self> {
        let names: Vec<String> = self.vars.names().to_vec();
        for (i, e) in exclusions.iter().enumerate() {
            check_vars(e, &names, &format!("exclusions[{}]", i + 1))?;
        }
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(Error::validation("exclusion_tol", format!("must be a finite non-negative number, got {tol}")));
        }
        self.exclusions = exclusions;
        self.exclusion_tol = tol;
        Ok(self)
    }

    /// Surface dimension m.
    pub fn m(&self) -> usize {
        self.coords.len()
    }

    /// Ambient dimension m + 1.
    pub fn n(&self) -> usize {
        self.coords.len() + 1
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn ambient(&self) -> &AmbientSpec {
        &self.ambient
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn exclusions(&self) -> &[Expr] {
        &self.exclusions
    }

    pub fn exclusion_tol(&self) -> f64 {
        self.exclusion_tol
    }

    /// Jet variables `u¹..uᵐ, t`.
    pub fn vars(&self) -> &Arc<VariableSet> {
        &self.vars
    }

    /// Index of the first exclusion predicate with `|e(X, t)| < tol`.
    pub fn excluded_by(&self, x: &[f64], t: f64) -> Result<Option<usize>> {
        let mut env = std::collections::HashMap::new();
        for (name, v) in self.coords.iter().zip(x) {
            env.insert(name.as_str(), *v);
        }
        env.insert(TIME, t);
        for (i, e) in self.exclusions.iter().enumerate() {
            if eval_f64(e, &env)?.abs() < self.exclusion_tol {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// φ as order-3 jets seeded at `(X, t)`.
    pub fn eval_phi(&self, x: &[f64], t: f64) -> Result<Vec<Jet>> {
        if x.len() != self.m() {
            return Err(Error::DimensionMismatch { what: "material point".into(), expected: self.m(), got: x.len() });
        }
        let mut p = x.to_vec();
        p.push(t);
        let env = JetEnv::seeded(&self.vars, &p)?;
        Ok(self.components.iter().map(|e| eval_jet(e, &env)).collect::<Result<_, _>>()?)
    }
}

fn check_vars(e: &Expr, allowed: &[String], field: &str) -> Result<()> {
    match free_vars(e).into_iter().find(|v| !allowed.contains(v)) {
        Some(bad) => Err(Error::validation(field, format!("variable `{bad}` is not allowed (allowed: {})", allowed.join(",")))),
        None => Ok(()),
    }
}

/// Pointwise geometric record.
#[derive(Debug, Clone)]
pub struct GeomFrame {
    pub vars: Arc<VariableSet>,
    pub m: usize,
    /// `(u¹..uᵐ, t)`.
    pub point: Vec<f64>,
    pub phi: Vec<Jet>,
    pub ambient: Pullback,
    /// Deformation gradient, `(m+1) × m`, columns `∂ᵢφ`.
    pub f: Array2<Jet>,
    pub g: Array2<Jet>,
    pub ginv: Array2<Jet>,
    pub det_g: f64,
    pub normal: Array1<Jet>,
    pub b: Array2<Jet>,
    /// Shape operator `Sⁱⱼ`.
    pub s: Array2<Jet>,
    pub iii: Array2<f64>,
    pub gamma: Array3<Jet>,
    pub riemann: Array4<f64>,
    /// `(∇ᵢS)ᵏⱼ` as `[i, k, j]`.
    pub nabla_s: Array3<f64>,
    /// `(∇ᵢB)ⱼₖ` as `[i, j, k]`.
    pub nabla_b: Array3<f64>,
}

impl GeomFrame {
    pub fn compute(spec: &MotionSpec, x: &[f64], t: f64) -> Result<Self> {
        let m = spec.m();
        let phi = spec.eval_phi(x, t)?;
        let ambient = pull_back(spec.ambient(), &phi)?;
        let f = jacobian(&phi, m);
        let (g, ginv, det_g) = induced_metric(&f, &ambient.metric)?;
        let normal = unit_normal(&f, &ambient.inverse)?;
        let b = second_fundamental_form(&phi, &f, &normal, &ambient);
        let s = shape_operator(&ginv, &b);
        let iii = third_fundamental_form(&tensor::values(&b), &tensor::values(&s));
        let gamma = christoffels(&g, &ginv);
        let riemann = riemann(&gamma);
        let nabla_s = cov_deriv_11(&s, &gamma);
        let nabla_b = cov_deriv_02(&b, &gamma);
        let mut point = x.to_vec();
        point.push(t);
        Ok(Self { vars: spec.vars().clone(), m, point, phi, ambient, f, g, ginv, det_g, normal, b, s, iii, gamma, riemann, nabla_s, nabla_b })
    }

    /// Jet variable index of time.
    pub fn time_index(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.m + 1
    }

    pub fn f_values(&self) -> Array2<f64> {
        tensor::values(&self.f)
    }
    pub fn g_values(&self) -> Array2<f64> {
        tensor::values(&self.g)
    }
    pub fn ginv_values(&self) -> Array2<f64> {
        tensor::values(&self.ginv)
    }
    pub fn normal_values(&self) -> Array1<f64> {
        tensor::values(&self.normal)
    }
    pub fn b_values(&self) -> Array2<f64> {
        tensor::values(&self.b)
    }
    pub fn s_values(&self) -> Array2<f64> {
        tensor::values(&self.s)
    }
    pub fn gamma_values(&self) -> Array3<f64> {
        tensor::values(&self.gamma)
    }
    pub fn gbar_values(&self) -> Array2<f64> {
        tensor::values(&self.ambient.metric)
    }

    /// ḡ(a, b) for ambient vectors.
    pub fn gbar_dot(&self, a: &Array1<f64>, b: &Array1<f64>) -> f64 {
        a.dot(&self.gbar_values().dot(b))
    }

    /// `J w` for a chart vector `w`.
    pub fn push_forward(&self, w: &Array1<f64>) -> Array1<f64> {
        self.f_values().dot(w)
    }

    /// Principal curvatures (eigenvalues of S), ascending.
    pub fn principal_curvatures(&self) -> Vec<f64> {
        let m = self.m;
        let g = DMatrix::from_fn(m, m, |i, j| self.g[[i, j]].value());
        let b = DMatrix::from_fn(m, m, |i, j| self.b[[i, j]].value());
        let Some(chol) = g.cholesky() else { return vec![f64::NAN; m] };
        let l = chol.l();
        let linv = l.clone().try_inverse().expect("cholesky factor is invertible");
        let mut w = &linv * b * linv.transpose();
        w = (&w + w.transpose()) * 0.5;
        let mut ev: Vec<f64> = SymmetricEigen::new(w).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Columns `∂ᵢφ` for `i < m`.
pub fn jacobian(phi: &[Jet], m: usize) -> Array2<Jet> {
    Array2::from_shape_fn((phi.len(), m), |(a, i)| phi[a].diff(i))
}

/// The deformation gradient at `(X, t)`.
pub fn deformation_gradient(spec: &MotionSpec, x: &[f64], t: f64) -> Result<Array2<Jet>> {
    Ok(jacobian(&spec.eval_phi(x, t)?, spec.m()))
}

/// `gᵢⱼ = ḡ_ab Fᵃᵢ Fᵇⱼ`, its inverse and determinant.
pub fn induced_metric(f: &Array2<Jet>, gbar: &Array2<Jet>) -> Result<(Array2<Jet>, Array2<Jet>, f64)> {
    let ft = f.t().to_owned();
    let g = tensor::matmul(&ft, &tensor::matmul(gbar, f));
    // Symmetrize exactly; the two triangles differ only by rounding.
    let g = Array2::from_shape_fn(g.raw_dim(), |(i, j)| if i <= j { g[[i, j]].clone() } else { g[[j, i]].clone() });
    let det = tensor::det_values(&tensor::values(&g));
    if det <= TOL_SING {
        return Err(Error::DegenerateFrame { det });
    }
    let ginv = tensor::inverse(&g).map_err(|_| Error::DegenerateFrame { det })?;
    Ok((g, ginv, det))
}

fn permutation_sign(p: &[usize]) -> f64 {
    let inversions = p.iter().tuple_combinations().filter(|(a, b)| a > b).count();
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Unit normal from the ε-contraction of F's columns, raised with ḡ⁻¹ and
/// normalized. The positive factor √det ḡ is dropped since normalization
/// removes it.
pub fn unit_normal(f: &Array2<Jet>, gbar_inv: &Array2<Jet>) -> Result<Array1<Jet>> {
    let (n, m) = f.dim();
    let vars = f[[0, 0]].vars().clone();
    let mut low = tensor::zeros1(&vars, n);
    for p in (0..n).permutations(n) {
        let mut term = Jet::constant(&vars, permutation_sign(&p));
        for i in 0..m {
            term = &term * &f[[p[i + 1], i]];
        }
        low[p[0]] = &low[p[0]] + &term;
    }
    let up = tensor::matmul(gbar_inv, &low.clone().insert_axis(ndarray::Axis(1))).remove_axis(ndarray::Axis(1));
    let mut norm2 = Jet::zero(&vars);
    for a in 0..n {
        norm2.fma_assign(&low[a], &up[a]);
    }
    if norm2.value() <= f64::EPSILON * f64::EPSILON {
        return Err(Error::ZeroNormal);
    }
    let inv_norm = norm2.sqrt()?.recip()?;
    Ok(up.map(|c| c * &inv_norm))
}

/// `Bᵢⱼ = ḡ(n, ∂ᵢ∂ⱼφ + Γ̄(∂ᵢφ, ∂ⱼφ))`.
pub fn second_fundamental_form(phi: &[Jet], f: &Array2<Jet>, normal: &Array1<Jet>, amb: &Pullback) -> Array2<Jet> {
    let (n, m) = f.dim();
    let vars = f[[0, 0]].vars().clone();
    // n_b = ḡ_ab nᵃ
    let n_low: Vec<Jet> = (0..n)
        .map(|b| {
            let mut acc = Jet::zero(&vars);
            for a in 0..n {
                acc.fma_assign(&amb.metric[[a, b]], &normal[a]);
            }
            acc
        })
        .collect();
    let mut out = tensor::zeros2(&vars, m, m);
    for i in 0..m {
        for j in i..m {
            let mut acc = Jet::zero(&vars);
            for b in 0..n {
                let mut accel = phi[b].diff(i).diff(j);
                for c in 0..n {
                    for d in 0..n {
                        let fc = &f[[c, i]] * &f[[d, j]];
                        accel.fma_assign(&amb.christoffel[[b, c, d]], &fc);
                    }
                }
                acc.fma_assign(&n_low[b], &accel);
            }
            out[[j, i]] = acc.clone();
            out[[i, j]] = acc;
        }
    }
    out
}

/// `S = g⁻¹B`.
pub fn shape_operator(ginv: &Array2<Jet>, b: &Array2<Jet>) -> Array2<Jet> {
    tensor::matmul(ginv, b)
}

/// `IIIᵢⱼ = Bᵢₖ Sᵏⱼ`.
pub fn third_fundamental_form(b: &Array2<f64>, s: &Array2<f64>) -> Array2<f64> {
    b.dot(s)
}

pub fn christoffels(g: &Array2<Jet>, ginv: &Array2<Jet>) -> Array3<Jet> {
    tensor::christoffel(g, ginv)
}

pub fn riemann(gamma: &Array3<Jet>) -> Array4<f64> {
    tensor::values(&tensor::riemann(gamma))
}

/// `(∇ᵢX)ᵏ = ∂ᵢXᵏ + Γᵏᵢₗ Xˡ` as `[i, k]`.
pub fn cov_deriv_vector(x: &Array1<Jet>, gamma: &Array3<Jet>) -> Array2<f64> {
    let m = gamma.shape()[0];
    Array2::from_shape_fn((m, m), |(i, k)| x[k].d1(i) + (0..m).map(|l| gamma[[k, i, l]].value() * x[l].value()).sum::<f64>())
}

/// `(∇ᵢf) = ∂ᵢf` for a scalar, with the gradient `∇f = (df)♯` alongside.
pub fn gradient(f: &Jet, ginv: &Array2<f64>) -> (Array1<f64>, Array1<f64>) {
    let m = ginv.nrows();
    let df = Array1::from_shape_fn(m, |i| f.d1(i));
    let grad = ginv.dot(&df);
    (df, grad)
}

/// `(∇ᵢT)ᵏⱼ = ∂ᵢTᵏⱼ + Γᵏᵢₗ Tˡⱼ − Γˡᵢⱼ Tᵏₗ` as `[i, k, j]`.
pub fn cov_deriv_11(t: &Array2<Jet>, gamma: &Array3<Jet>) -> Array3<f64> {
    let m = gamma.shape()[0];
    let gv = tensor::values(gamma);
    let tv = tensor::values(t);
    Array3::from_shape_fn((m, m, m), |(i, k, j)| {
        let mut s = t[[k, j]].d1(i);
        for l in 0..m {
            s += gv[[k, i, l]] * tv[[l, j]] - gv[[l, i, j]] * tv[[k, l]];
        }
        s
    })
}

/// `(∇ᵢT)ⱼₖ = ∂ᵢTⱼₖ − Γˡᵢⱼ Tₗₖ − Γˡᵢₖ Tⱼₗ` as `[i, j, k]`.
pub fn cov_deriv_02(t: &Array2<Jet>, gamma: &Array3<Jet>) -> Array3<f64> {
    let m = gamma.shape()[0];
    let gv = tensor::values(gamma);
    let tv = tensor::values(t);
    Array3::from_shape_fn((m, m, m), |(i, j, k)| {
        let mut s = t[[j, k]].d1(i);
        for l in 0..m {
            s -= gv[[l, i, j]] * tv[[l, k]] + gv[[l, i, k]] * tv[[j, l]];
        }
        s
    })
}

/// `(∇ₗT)ᵏᵢⱼ` for a (1,2) tensor `[k, i, j]`, laid out `[l, k, i, j]`.
pub fn cov_deriv_12(t: &Array3<Jet>, gamma: &Array3<Jet>) -> Array4<f64> {
    let m = gamma.shape()[0];
    let gv = tensor::values(gamma);
    let tv = tensor::values(t);
    Array4::from_shape_fn((m, m, m, m), |(l, k, i, j)| {
        let mut s = t[[k, i, j]].d1(l);
        for p in 0..m {
            s += gv[[k, l, p]] * tv[[p, i, j]] - gv[[p, l, i]] * tv[[k, p, j]] - gv[[p, l, j]] * tv[[k, i, p]];
        }
        s
    })
}

/// `T♭ᵢⱼ = g(T eᵢ, eⱼ)` for a (1,1) tensor.
pub fn flat(t: &Array2<f64>, g: &Array2<f64>) -> Array2<f64> {
    t.t().dot(g)
}

/// Inverse of [`flat`]: `Tᵏᵢ = gᵏʲ ξᵢⱼ`.
pub fn sharp(xi: &Array2<f64>, ginv: &Array2<f64>) -> Array2<f64> {
    ginv.dot(&xi.t())
}

pub fn flat_vector(u: &Array1<f64>, g: &Array2<f64>) -> Array1<f64> {
    g.dot(u)
}

pub fn sharp_covector(xi: &Array1<f64>, ginv: &Array2<f64>) -> Array1<f64> {
    ginv.dot(xi)
}

/// Tangential chart components of an ambient vector: `wⁱ = gⁱʲ ḡ(W, Feⱼ)`.
pub fn project_tangent(w: &Array1<f64>, frame: &GeomFrame) -> Array1<f64> {
    let f = frame.f_values();
    let gbar = frame.gbar_values();
    let covec = f.t().dot(&gbar.dot(w));
    frame.ginv_values().dot(&covec)
}

/// `(R̄(X, Y)Z)ᵃ = R̄ᵃ_bcd Zᵇ Xᶜ Yᵈ`.
pub fn ambient_curvature_apply(r: &Array4<f64>, x: &Array1<f64>, y: &Array1<f64>, z: &Array1<f64>) -> Array1<f64> {
    let n = x.len();
    Array1::from_shape_fn(n, |a| {
        let mut s = 0.0;
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    s += r[[a, b, c, d]] * z[b] * x[c] * y[d];
                }
            }
        }
        s
    })
}

/// `(∇ᵢB)ⱼₖ − (∇ⱼB)ᵢₖ − ḡ(R̄(Feᵢ, Feⱼ)Feₖ, n)` as `[i, j, k]`.
pub fn codazzi_residual(frame: &GeomFrame) -> Array3<f64> {
    let m = frame.m;
    let f = frame.f_values();
    let n = frame.normal_values();
    let gbar = frame.gbar_values();
    Array3::from_shape_fn((m, m, m), |(i, j, k)| {
        let rv = ambient_curvature_apply(&frame.ambient.curvature, &f.column(i).to_owned(), &f.column(j).to_owned(), &f.column(k).to_owned());
        frame.nabla_b[[i, j, k]] - frame.nabla_b[[j, i, k]] - n.dot(&gbar.dot(&rv))
    })
}

/// `P R̄(Feᵢ, Feⱼ)Feₖ − (R(eᵢ, eⱼ)eₖ + Bᵢₖ Seⱼ − Bⱼₖ Seᵢ)` as `[l, k, i, j]`.
pub fn gauss_residual(frame: &GeomFrame) -> Array4<f64> {
    let m = frame.m;
    let f = frame.f_values();
    let b = frame.b_values();
    let s = frame.s_values();
    let mut out = Array4::zeros((m, m, m, m));
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let rv = ambient_curvature_apply(&frame.ambient.curvature, &f.column(i).to_owned(), &f.column(j).to_owned(), &f.column(k).to_owned());
                let lhs = project_tangent(&rv, frame);
                for l in 0..m {
                    let rhs = frame.riemann[[l, k, i, j]] + b[[i, k]] * s[[l, j]] - b[[j, k]] * s[[l, i]];
                    out[[l, k, i, j]] = lhs[l] - rhs;
                }
            }
        }
    }
    out
}

/// `max(|ḡ(n,n) − 1|, |ḡ(n, Feᵢ)|)`.
pub fn normal_residual(frame: &GeomFrame) -> f64 {
    let n = frame.normal_values();
    let f = frame.f_values();
    let gbar = frame.gbar_values();
    let gn = gbar.dot(&n);
    let mut worst = (n.dot(&gn) - 1.0).abs();
    for i in 0..frame.m {
        worst = worst.max(f.column(i).dot(&gn).abs());
    }
    worst
}

/// Compares `Bᵢⱼ` against `−ḡ(∂ᵢn + Γ̄(Feᵢ, n), Feⱼ)`, pinning the sign of S.
pub fn weingarten_residual(frame: &GeomFrame) -> f64 {
    let (m, n) = (frame.m, frame.n());
    let f = frame.f_values();
    let nv = frame.normal_values();
    let gbar = frame.gbar_values();
    let gam = tensor::values(&frame.ambient.christoffel);
    let b = frame.b_values();
    let mut worst = 0.0_f64;
    for i in 0..m {
        let dn = Array1::from_shape_fn(n, |a| {
            let mut s = frame.normal[a].d1(i);
            for c in 0..n {
                for d in 0..n {
                    s += gam[[a, c, d]] * f[[c, i]] * nv[d];
                }
            }
            s
        });
        for j in 0..m {
            let rhs = -dn.dot(&gbar.dot(&f.column(j)));
            worst = worst.max((b[[i, j]] - rhs).abs());
        }
    }
    worst
}
