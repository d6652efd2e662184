//! Variation of the Levi-Civita connection δ∇ by independent routes, the Lie
//! derivative of the connection, the normal-motion reductions and the
//! affine / isometric classifier.
//!
//! Every δ∇ array is laid out `[k, i, j]` for `δ∇(eᵢ, eⱼ)ᵏ`.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, Array3};
use serde::Serialize;

use crate::jet::Jet;
use crate::kinematics::{richardson, KinFrame};
use crate::surface::{self, ambient_curvature_apply, project_tangent, GeomFrame, MotionSpec};
use crate::tensor;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// `∂ₜΓ` of the τ-metric.
    Definition,
    /// Velocity-gradient form with the projection P.
    Projection,
    /// `∇𝒟♭` form.
    Stretch,
    /// Shape-operator form with the Lie derivative of the connection.
    Geometric,
    /// Normal motion: `∇(vₙB)` form.
    Normal,
    /// Normal motion: expanded `vₙ∇B` and `dvₙ·B` form.
    NormalExpanded,
    /// Normal motion in a Euclidean ambient.
    EuclideanNormal,
    /// Parallel motion in a Euclidean ambient: `−vₙ∇S`.
    Parallel,
}

impl Route {
    pub const BASE: [Route; 4] = [Route::Definition, Route::Projection, Route::Stretch, Route::Geometric];

    pub fn name(self) -> &'static str {
        match self {
            Route::Definition => "definition",
            Route::Projection => "projection",
            Route::Stretch => "stretch",
            Route::Geometric => "geometric",
            Route::Normal => "normal",
            Route::NormalExpanded => "normal_expanded",
            Route::EuclideanNormal => "euclidean_normal",
            Route::Parallel => "parallel",
        }
    }
}

impl std::fmt::Display for Route {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// `δ∇ᵏᵢⱼ = ∂ₜΓᵏᵢⱼ`.
pub fn delta_connection_definition(frame: &GeomFrame) -> Array3<f64> {
    tensor::d1(&frame.gamma, frame.time_index())
}

/// `δ∇ᵏᵢⱼ = gᵏˡ[(∇ᵢ𝒟♭)ⱼₗ + (∇ⱼ𝒟♭)ᵢₗ − (∇ₗ𝒟♭)ᵢⱼ]`.
pub fn delta_connection_stretch(frame: &GeomFrame, kin: &KinFrame) -> Array3<f64> {
    raise_first(&lowered_from_derivative(&kin.nabla_d_flat, 1.0), &frame.ginv_values())
}

// T_lij = c·[(∇ᵢX)ⱼₗ + (∇ⱼX)ᵢₗ − (∇ₗX)ᵢⱼ] from a derivative-first (0,3) array.
fn lowered_from_derivative(nab: &Array3<f64>, c: f64) -> Array3<f64> {
    let m = nab.shape()[0];
    Array3::from_shape_fn((m, m, m), |(l, i, j)| c * (nab[[i, j, l]] + nab[[j, i, l]] - nab[[l, i, j]]))
}

fn raise_first(t: &Array3<f64>, ginv: &Array2<f64>) -> Array3<f64> {
    let m = t.shape()[0];
    Array3::from_shape_fn((m, m, m), |(k, i, j)| (0..m).map(|l| ginv[[k, l]] * t[[l, i, j]]).sum())
}

/// `δ∇(u,w) = −PG∇ᵤw + P∇̄_{Ju}Gw − B(u,w)PWn + PR̄(v,Ju)w̄` on coordinate fields.
pub fn delta_connection_projection(frame: &GeomFrame, kin: &KinFrame) -> Array3<f64> {
    let (n, m) = (frame.n(), frame.m);
    let f = frame.f_values();
    let gv = tensor::values(&kin.grad_v);
    let gam = frame.gamma_values();
    let gbar_gam = tensor::values(&frame.ambient.christoffel);
    let b = frame.b_values();
    let v = kin.v_values();
    let pg = Array2::from_shape_fn((m, m), |_| 0.0);
    let mut pg = pg;
    for k in 0..m {
        pg.column_mut(k).assign(&project_tangent(&gv.column(k).to_owned(), frame));
    }
    // P W n = −(S v∥ + ∇vₙ)
    let pwn = -(frame.s_values().dot(&kin.v_par_values()) + &kin.grad_v_n);
    let mut out = Array3::zeros((m, m, m));
    for i in 0..m {
        for j in 0..m {
            let cov = Array1::from_shape_fn(n, |a| {
                let mut s = kin.grad_v[[a, j]].d1(i);
                for c in 0..n {
                    for d in 0..n {
                        s += gbar_gam[[a, c, d]] * f[[c, i]] * gv[[d, j]];
                    }
                }
                s
            });
            let p_cov = project_tangent(&cov, frame);
            let rv = ambient_curvature_apply(&frame.ambient.curvature, &v, &f.column(i).to_owned(), &f.column(j).to_owned());
            let p_r = project_tangent(&rv, frame);
            for l in 0..m {
                let mut s = p_cov[l] - b[[i, j]] * pwn[l] + p_r[l];
                for k in 0..m {
                    s -= pg[[l, k]] * gam[[k, i, j]];
                }
                out[[l, i, j]] = s;
            }
        }
    }
    out
}

/// `δ∇(u,w) = −vₙ(∇ᵤS)w − {w(vₙ)Su + u(vₙ)Sw} + B(u,w)∇vₙ + vₙPR̄(n,Ju)w̄ + (£_{v∥}∇)(u,w)`.
pub fn delta_connection_geometric(frame: &GeomFrame, kin: &KinFrame, lie: &Array3<f64>) -> Array3<f64> {
    let m = frame.m;
    let f = frame.f_values();
    let s = frame.s_values();
    let b = frame.b_values();
    let nv = frame.normal_values();
    let vn = kin.v_n.value();
    let dvn = &kin.dv_n;
    let mut out = Array3::zeros((m, m, m));
    for i in 0..m {
        for j in 0..m {
            let rv = ambient_curvature_apply(&frame.ambient.curvature, &nv, &f.column(i).to_owned(), &f.column(j).to_owned());
            let p_r = project_tangent(&rv, frame);
            for k in 0..m {
                out[[k, i, j]] = -vn * frame.nabla_s[[i, k, j]] - (dvn[j] * s[[k, i]] + dvn[i] * s[[k, j]])
                    + b[[i, j]] * kin.grad_v_n[k]
                    + vn * p_r[k]
                    + lie[[k, i, j]];
            }
        }
    }
    out
}

/// `(£_XΓ)ᵏᵢⱼ = ∂ᵢ∂ⱼXᵏ + Xˡ∂ₗΓᵏᵢⱼ − ∂ₗXᵏΓˡᵢⱼ + ∂ᵢXˡΓᵏₗⱼ + ∂ⱼXˡΓᵏᵢₗ`.
pub fn lie_derivative_connection(frame: &GeomFrame, x: &Array1<Jet>) -> Array3<f64> {
    let m = frame.m;
    let gam = frame.gamma_values();
    let xv = tensor::values(x);
    Array3::from_shape_fn((m, m, m), |(k, i, j)| {
        let mut s = x[k].partial(&[i, j]).expect("vector field carries second derivatives");
        for l in 0..m {
            s += xv[l] * frame.gamma[[k, i, j]].d1(l) - x[k].d1(l) * gam[[l, i, j]] + x[l].d1(i) * gam[[k, l, j]] + x[l].d1(j) * gam[[k, i, l]];
        }
        s
    })
}

/// `[X, Y]ᵏ = Xˡ∂ₗYᵏ − Yˡ∂ₗXᵏ` as jets.
pub fn bracket(x: &Array1<Jet>, y: &Array1<Jet>) -> Array1<Jet> {
    let m = x.len();
    let vars = x[0].vars().clone();
    Array1::from_shape_fn(m, |k| {
        let mut acc = Jet::zero(&vars);
        for l in 0..m {
            acc.fma_assign(&x[l], &y[k].diff(l));
            acc.fma_assign(&(-&y[l]), &x[k].diff(l));
        }
        acc
    })
}

/// `∇_Z Y` for chart vector fields as jets.
pub fn covariant_along(z: &Array1<Jet>, y: &Array1<Jet>, gamma: &Array3<Jet>) -> Array1<Jet> {
    let m = z.len();
    let vars = z[0].vars().clone();
    Array1::from_shape_fn(m, |k| {
        let mut acc = Jet::zero(&vars);
        for i in 0..m {
            acc.fma_assign(&z[i], &y[k].diff(i));
            for l in 0..m {
                let zy = &z[i] * &y[l];
                acc.fma_assign(&gamma[[k, i, l]], &zy);
            }
        }
        acc
    })
}

/// `(£_X∇)(u, w) = [X, ∇ᵤw] − ∇_{[X,u]}w − ∇ᵤ[X, w]` evaluated on coordinate
/// fields with vector-field brackets.
pub fn lie_derivative_bracket(frame: &GeomFrame, x: &Array1<Jet>) -> Array3<f64> {
    let m = frame.m;
    let vars = &frame.vars;
    let coord = |i: usize| Array1::from_shape_fn(m, |k| Jet::constant(vars, if k == i { 1.0 } else { 0.0 }));
    let mut out = Array3::zeros((m, m, m));
    for i in 0..m {
        for j in 0..m {
            let (ei, ej) = (coord(i), coord(j));
            let nab_ij = covariant_along(&ei, &ej, &frame.gamma);
            let t1 = bracket(x, &nab_ij);
            let t2 = covariant_along(&bracket(x, &ei), &ej, &frame.gamma);
            let t3 = covariant_along(&ei, &bracket(x, &ej), &frame.gamma);
            for k in 0..m {
                out[[k, i, j]] = t1[k].value() - t2[k].value() - t3[k].value();
            }
        }
    }
    out
}

/// The normal-motion forms, computed without checking the motion class.
fn normal_forms_unchecked(frame: &GeomFrame, kin: &KinFrame) -> BTreeMap<Route, Array3<f64>> {
    let m = frame.m;
    let ginv = frame.ginv_values();
    let b = frame.b_values();
    let vn = kin.v_n.value();
    let dvn = &kin.dv_n;
    // ∇(vₙB) straight from the product jet.
    let vnb = frame.b.map(|x| x * &kin.v_n);
    let nab_vnb = surface::cov_deriv_02(&vnb, &frame.gamma);
    let general = raise_first(&lowered_from_derivative(&nab_vnb, -1.0), &ginv);

    let db = Array3::from_shape_fn((m, m, m), |(l, i, j)| dvn[i] * b[[j, l]] + dvn[j] * b[[i, l]] - dvn[l] * b[[i, j]]);
    let expanded_low = lowered_from_derivative(&frame.nabla_b, -vn) - &db;
    let euclid_low = Array3::from_shape_fn((m, m, m), |(l, i, j)| -vn * frame.nabla_b[[i, j, l]]) - &db;
    let parallel = &frame.nabla_s * -vn;
    let parallel = Array3::from_shape_fn((m, m, m), |(k, i, j)| parallel[[i, k, j]]);

    let mut out = BTreeMap::new();
    out.insert(Route::Normal, general);
    out.insert(Route::NormalExpanded, raise_first(&expanded_low, &ginv));
    out.insert(Route::EuclideanNormal, raise_first(&euclid_low, &ginv));
    out.insert(Route::Parallel, parallel);
    out
}

/// Motion-class flags over a grid.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClassFlags {
    pub tangential: bool,
    pub normal: bool,
    pub parallel_normal: bool,
}

/// The normal-motion reductions that apply under `flags` in an ambient that
/// is (`euclidean`) or is not Euclidean. Fails unless the motion is normal.
pub fn delta_connection_normal(
    frame: &GeomFrame,
    kin: &KinFrame,
    flags: ClassFlags,
    euclidean: bool,
) -> Result<BTreeMap<Route, Array3<f64>>> {
    if !flags.normal {
        return Err(Error::Misuse("normal-motion forms requested for a motion that is not normal".into()));
    }
    let mut forms = normal_forms_unchecked(frame, kin);
    forms.retain(|r, _| normal_route_applies(*r, flags, euclidean));
    Ok(forms)
}

fn normal_route_applies(route: Route, flags: ClassFlags, euclidean: bool) -> bool {
    match route {
        Route::Normal | Route::NormalExpanded => flags.normal,
        Route::EuclideanNormal => flags.normal && euclidean,
        Route::Parallel => flags.parallel_normal && euclidean,
        _ => true,
    }
}

/// Routes to compare for a motion with the given class.
pub fn applicable_routes(flags: ClassFlags, euclidean: bool) -> Vec<Route> {
    let mut out = Route::BASE.to_vec();
    for r in [Route::Normal, Route::NormalExpanded, Route::EuclideanNormal, Route::Parallel] {
        if normal_route_applies(r, flags, euclidean) {
            out.push(r);
        }
    }
    out
}

/// Per-point variation data.
#[derive(Debug, Clone)]
pub struct VariationRecord {
    /// All computed δ∇ arrays; normal-family forms are present even when the
    /// motion class does not license them.
    pub routes: BTreeMap<Route, Array3<f64>>,
    pub lie: Array3<f64>,
    pub lie_bracket: Array3<f64>,
    /// General normal form minus the Euclidean form, minus the Codazzi
    /// curvature term that separates them.
    pub codazzi_rearrangement: f64,
    pub delta_norm: f64,
    pub nabla_d_norm: f64,
    pub d_norm: f64,
    pub lie_norm: f64,
}

impl VariationRecord {
    pub fn compute(frame: &GeomFrame, kin: &KinFrame) -> Result<Self> {
        let lie = lie_derivative_connection(frame, &kin.v_par);
        let lie_bracket = lie_derivative_bracket(frame, &kin.v_par);
        let mut routes = BTreeMap::new();
        routes.insert(Route::Definition, delta_connection_definition(frame));
        routes.insert(Route::Projection, delta_connection_projection(frame, kin));
        routes.insert(Route::Stretch, delta_connection_stretch(frame, kin));
        routes.insert(Route::Geometric, delta_connection_geometric(frame, kin, &lie));
        routes.extend(normal_forms_unchecked(frame, kin));
        let codazzi_rearrangement = codazzi_rearrangement(frame, kin, &routes);
        let (g, ginv) = (frame.g_values(), frame.ginv_values());
        Ok(Self {
            delta_norm: tensor::norm_12(&routes[&Route::Definition], &g, &ginv),
            nabla_d_norm: tensor::norm_03(&kin.nabla_d_flat, &ginv),
            d_norm: tensor::norm_02(&kin.d_flat_values(), &ginv),
            lie_norm: tensor::norm_12(&lie, &g, &ginv),
            routes,
            lie,
            lie_bracket,
            codazzi_rearrangement,
        })
    }

    /// Largest normalized pairwise residual among `routes`, with the pair.
    pub fn max_route_residual(&self, routes: &[Route]) -> (f64, Option<(Route, Route)>) {
        let mut worst = (0.0, None);
        for (a, ra) in routes.iter().enumerate() {
            for rb in &routes[a + 1..] {
                let r = tensor::rel_residual(&self.routes[ra], &self.routes[rb]);
                if r > worst.0 || worst.1.is_none() {
                    worst = (r, Some((*ra, *rb)));
                }
            }
        }
        worst
    }

    /// Largest `|δ∇ᵏᵢⱼ − δ∇ᵏⱼᵢ|` over `routes`.
    pub fn symmetry_residual(&self, routes: &[Route]) -> f64 {
        routes.iter().map(|r| symmetry_defect(&self.routes[r])).fold(0.0, f64::max)
    }
}

pub fn symmetry_defect(t: &Array3<f64>) -> f64 {
    let swapped = t.view().permuted_axes([0, 2, 1]);
    tensor::abs_residual(t, &swapped)
}

fn codazzi_rearrangement(frame: &GeomFrame, kin: &KinFrame, routes: &BTreeMap<Route, Array3<f64>>) -> f64 {
    let m = frame.m;
    let f = frame.f_values();
    let nv = frame.normal_values();
    let gbar = frame.gbar_values();
    let vn = kin.v_n.value();
    // −vₙ ḡ(R̄(Feⱼ, Feₗ)Feᵢ, n), raised on l.
    let low = Array3::from_shape_fn((m, m, m), |(l, i, j)| {
        let rv = ambient_curvature_apply(&frame.ambient.curvature, &f.column(j).to_owned(), &f.column(l).to_owned(), &f.column(i).to_owned());
        -vn * nv.dot(&gbar.dot(&rv))
    });
    let term = raise_first(&low, &frame.ginv_values());
    let diff = &routes[&Route::NormalExpanded] - &routes[&Route::EuclideanNormal];
    tensor::abs_residual(&diff, &term)
}

/// δ∇ by central differences of the Christoffel symbols of `g_t(τ)`.
pub fn fd_delta_connection(spec: &MotionSpec, x: &[f64], t: f64, h: f64) -> Result<Array3<f64>> {
    richardson(
        |tau| {
            let phi = spec.eval_phi(x, tau)?;
            let gbar = crate::ambient::ambient_metric_at(spec.ambient(), &phi)?;
            let f = surface::jacobian(&phi, spec.m());
            let (g, ginv, _) = surface::induced_metric(&f, &gbar)?;
            Ok(tensor::values(&surface::christoffels(&g, &ginv)))
        },
        t,
        h,
    )
}

/// Classification thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub affine: f64,
    pub isometric: f64,
    pub route: f64,
    pub class: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { affine: 1e-6, isometric: 1e-8, route: 1e-7, class: 1e-9 }
    }
}

/// The scalar per-point inputs of [`classify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointNorms {
    pub d_norm: f64,
    pub nabla_d_norm: f64,
    pub delta_norm: f64,
    pub lie_norm: f64,
    pub v_n_abs: f64,
    pub v_par_norm: f64,
    pub grad_v_n_norm: f64,
}

impl PointNorms {
    pub fn new(frame: &GeomFrame, kin: &KinFrame, var: &VariationRecord) -> Self {
        let g = frame.g_values();
        Self {
            d_norm: var.d_norm,
            nabla_d_norm: var.nabla_d_norm,
            delta_norm: var.delta_norm,
            lie_norm: var.lie_norm,
            v_n_abs: kin.v_n.value().abs(),
            v_par_norm: tensor::norm_vec(&kin.v_par_values(), &g),
            grad_v_n_norm: tensor::norm_vec(&kin.grad_v_n, &g),
        }
    }
}

/// Motion class from grid maxima.
pub fn class_flags(points: &[PointNorms], tol: f64) -> ClassFlags {
    let max = |f: fn(&PointNorms) -> f64| points.iter().map(f).fold(0.0, f64::max);
    let normal = max(|p| p.v_par_norm) < tol;
    ClassFlags { tangential: max(|p| p.v_n_abs) < tol, normal, parallel_normal: normal && max(|p| p.grad_v_n_norm) < tol }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub affine: bool,
    pub isometric: bool,
    pub sup_nabla_d: f64,
    pub sup_d: f64,
    /// `sup‖∇𝒟‖ / (1 + sup‖𝒟‖)`, compared against the affine tolerance.
    pub affine_ratio: f64,
    pub sup_delta_connection: f64,
    /// `sup‖£_{v∥}∇‖`, reported for tangential motions.
    pub sup_lie: Option<f64>,
    pub flags: ClassFlags,
    pub tolerances: Tolerances,
}

pub fn classify(points: &[PointNorms], tol: &Tolerances) -> Result<Verdict> {
    if points.is_empty() {
        return Err(Error::EmptyGrid("nothing to classify".into()));
    }
    let sup = |f: fn(&PointNorms) -> f64| points.iter().map(f).fold(0.0, f64::max);
    let sup_nabla_d = sup(|p| p.nabla_d_norm);
    let sup_d = sup(|p| p.d_norm);
    let affine_ratio = sup_nabla_d / (1.0 + sup_d);
    let flags = class_flags(points, tol.class);
    Ok(Verdict {
        affine: affine_ratio < tol.affine,
        isometric: sup_d < tol.isometric,
        sup_nabla_d,
        sup_d,
        affine_ratio,
        sup_delta_connection: sup(|p| p.delta_norm),
        sup_lie: flags.tangential.then(|| sup(|p| p.lie_norm)),
        flags,
        tolerances: *tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::AmbientSpec;
    use crate::expr::parse_str;

    fn motion(comps: &[&str]) -> MotionSpec {
        let n = comps.len();
        let coords = if n == 3 { vec!["u".into(), "v".into()] } else { vec!["u".into()] };
        MotionSpec::new(coords, comps.iter().map(|c| parse_str(c).unwrap()).collect(), AmbientSpec::euclidean(n).unwrap()).unwrap()
    }

    fn record(spec: &MotionSpec, x: &[f64], t: f64) -> (GeomFrame, KinFrame, VariationRecord) {
        let fr = GeomFrame::compute(spec, x, t).unwrap();
        let kin = KinFrame::compute(&fr).unwrap();
        let var = VariationRecord::compute(&fr, &kin).unwrap();
        (fr, kin, var)
    }

    #[test]
    fn balloon_routes_vanish() {
        let spec = motion(&["t*cos(u)*sin(2*v)", "t*sin(u)*sin(2*v)", "2*t*sin(v)^2"]);
        let (_, _, var) = record(&spec, &[0.4, 0.3], 1.0);
        for r in Route::BASE {
            assert!(tensor::max_abs(&var.routes[&r]) < 1e-10, "{r}: {}", tensor::max_abs(&var.routes[&r]));
        }
        assert!(var.nabla_d_norm < 1e-10);
    }

    #[test]
    fn generic_motion_routes_agree() {
        let spec = motion(&["u + 0.1*t*sin(v)", "v - 0.2*t^2*u", "0.3*sin(u)*cos(v) + 0.2*t*u*v"]);
        let (_, _, var) = record(&spec, &[0.2, -0.4], 1.2);
        let (r, _) = var.max_route_residual(&Route::BASE);
        assert!(r < 1e-10, "{r}");
        assert!(tensor::max_abs(&var.routes[&Route::Definition]) > 1e-3);
        assert!(var.symmetry_residual(&Route::BASE) < 1e-12);
        assert!(tensor::abs_residual(&var.lie, &var.lie_bracket) < 1e-12);
        assert!(var.codazzi_rearrangement < 1e-12);
    }

    #[test]
    fn lie_derivative_examples_on_the_plane() {
        // Rigid slide along u on the plane: X = e₁. Scaling along u: X = u e₁.
        for comps in [["u + t", "v", "0"], ["u*t", "v", "0"]] {
            let spec = motion(&comps);
            let (_, _, var) = record(&spec, &[0.4, 0.3], 1.0);
            assert!(tensor::max_abs(&var.lie) < 1e-14);
            assert!(tensor::max_abs(&var.lie_bracket) < 1e-14);
        }
    }

    #[test]
    fn killing_rotation_has_zero_lie_derivative() {
        let spec = motion(&["cos(u + 0.7*(t - 1))*sin(v)", "sin(u + 0.7*(t - 1))*sin(v)", "cos(v)"]);
        let (_, _, var) = record(&spec, &[0.4, 1.2], 1.0);
        assert!(tensor::max_abs(&var.lie) < 1e-12);
        assert!(tensor::abs_residual(&var.routes[&Route::Definition], &var.lie) < 1e-12);
    }

    #[test]
    fn normal_forms_need_a_normal_motion() {
        let spec = motion(&["t*cos(u)*sin(2*v)", "t*sin(u)*sin(2*v)", "2*t*sin(v)^2"]);
        let fr = GeomFrame::compute(&spec, &[0.4, 0.3], 1.0).unwrap();
        let kin = KinFrame::compute(&fr).unwrap();
        let err = delta_connection_normal(&fr, &kin, ClassFlags::default(), true).unwrap_err();
        assert!(matches!(err, Error::Misuse(_)));
        let flags = ClassFlags { tangential: false, normal: true, parallel_normal: false };
        let forms = delta_connection_normal(&fr, &kin, flags, true).unwrap();
        assert!(forms.contains_key(&Route::EuclideanNormal) && !forms.contains_key(&Route::Parallel));
    }

    #[test]
    fn classify_rejects_empty_grids() {
        assert!(matches!(classify(&[], &Tolerances::default()), Err(Error::EmptyGrid(_))));
    }

    #[test]
    fn fd_connection_matches_definition_route() {
        let spec = motion(&["u + 0.1*t*sin(v)", "v - 0.2*t^2*u", "0.3*sin(u)*cos(v) + 0.2*t*u*v"]);
        let (_, _, var) = record(&spec, &[0.2, -0.4], 1.2);
        let fd = fd_delta_connection(&spec, &[0.2, -0.4], 1.2, 1e-4).unwrap();
        assert!(tensor::abs_residual(&fd, &var.routes[&Route::Definition]) < 1e-8);
    }
}
