//! Motion-dependent quantities at `(X, t)`: velocity and its split, velocity
//! gradient, stretching by three routes, the rotation-rate action and the
//! variations δg and δn.
//!
//! The polar factors of the relative deformation gradient are never formed;
//! only their rates at τ = t are needed.

use ndarray::{Array1, Array2, Array3};

use crate::jet::Jet;
use crate::surface::{self, GeomFrame, MotionSpec};
use crate::tensor;
use crate::Result;

/// Default τ-step of the finite-difference oracle.
pub const FD_STEP: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct KinFrame {
    /// Spatial velocity `∂ₜφ`, ambient components.
    pub v: Array1<Jet>,
    /// Tangential part as a chart vector.
    pub v_par: Array1<Jet>,
    pub v_n: Jet,
    /// Velocity gradient `Gᵃᵢ`.
    pub grad_v: Array2<Jet>,
    pub delta_g: Array2<Jet>,
    pub d_flat: Array2<Jet>,
    /// Chart stretching `𝒟ⁱⱼ` from the metric rate.
    pub d: Array2<Jet>,
    pub d_kinematic: Array2<f64>,
    pub d_cauchy_green: Array2<f64>,
    /// `(∇ₖ𝒟♭)ᵢⱼ` as `[k, i, j]`.
    pub nabla_d_flat: Array3<f64>,
    /// `(∇ₖ𝒟)ⁱⱼ` as `[k, i, j]`.
    pub nabla_d: Array3<f64>,
    /// `dvₙ` (chart covector) and `∇vₙ = (dvₙ)♯`.
    pub dv_n: Array1<f64>,
    pub grad_v_n: Array1<f64>,
    /// Columns `W(Fe₁)..W(Feₘ), W(n)`.
    pub w_frame: Array2<f64>,
    /// `δn = Wn = −J(Sv∥ + ∇vₙ)`.
    pub delta_n: Array1<f64>,
    /// `∂ₜn + Γ̄(v, n)` from the normal jets.
    pub delta_n_transport: Array1<f64>,
}

impl KinFrame {
    pub fn compute(frame: &GeomFrame) -> Result<Self> {
        let v = velocity_of(frame);
        let (v_par, v_n) = velocity_split(&v, frame);
        let grad_v = velocity_gradient(&v, frame);
        let (delta_g, d_flat, d) = stretching_metric_route(frame);
        let d_kinematic = stretching_kinematic_route(frame, &v_par, &v_n);
        let d_cauchy_green = cauchy_green_rate(frame);
        let nabla_d_flat = surface::cov_deriv_02(&d_flat, &frame.gamma);
        let nabla_d = surface::cov_deriv_11(&d, &frame.gamma);
        let (dv_n, grad_v_n) = surface::gradient(&v_n, &frame.ginv_values());
        let w_frame = rotation_rate_action(frame, &grad_v, &tensor::values(&d), &tensor::values(&v_par), &grad_v_n);
        let delta_n = w_frame.column(frame.m).to_owned();
        let delta_n_transport = normal_transport(frame, &tensor::values(&v));
        Ok(Self {
            v,
            v_par,
            v_n,
            grad_v,
            delta_g,
            d_flat,
            d,
            d_kinematic,
            d_cauchy_green,
            nabla_d_flat,
            nabla_d,
            dv_n,
            grad_v_n,
            w_frame,
            delta_n,
            delta_n_transport,
        })
    }

    pub fn v_values(&self) -> Array1<f64> {
        tensor::values(&self.v)
    }

    pub fn v_par_values(&self) -> Array1<f64> {
        tensor::values(&self.v_par)
    }

    pub fn d_values(&self) -> Array2<f64> {
        tensor::values(&self.d)
    }

    pub fn d_flat_values(&self) -> Array2<f64> {
        tensor::values(&self.d_flat)
    }
}

/// `vᵃ = ∂ₜφᵃ` at `(X, t)`.
pub fn velocity(spec: &MotionSpec, x: &[f64], t: f64) -> Result<Array1<Jet>> {
    let phi = spec.eval_phi(x, t)?;
    Ok(phi.iter().map(|p| p.diff(spec.m())).collect())
}

fn velocity_of(frame: &GeomFrame) -> Array1<Jet> {
    frame.phi.iter().map(|p| p.diff(frame.time_index())).collect()
}

/// `(v∥, vₙ)` with `vₙ = ḡ(v, n)` and `v∥ = g⁻¹ ḡ(v, F·)`.
pub fn velocity_split(v: &Array1<Jet>, frame: &GeomFrame) -> (Array1<Jet>, Jet) {
    let (n, m) = (frame.n(), frame.m);
    let vars = &frame.vars;
    // v_b = ḡ_ab vᵃ
    let v_low: Vec<Jet> = (0..n)
        .map(|b| {
            let mut acc = Jet::zero(vars);
            for a in 0..n {
                acc.fma_assign(&frame.ambient.metric[[a, b]], &v[a]);
            }
            acc
        })
        .collect();
    let mut v_n = Jet::zero(vars);
    for b in 0..n {
        v_n.fma_assign(&v_low[b], &frame.normal[b]);
    }
    let covec: Vec<Jet> = (0..m)
        .map(|j| {
            let mut acc = Jet::zero(vars);
            for b in 0..n {
                acc.fma_assign(&v_low[b], &frame.f[[b, j]]);
            }
            acc
        })
        .collect();
    let v_par = Array1::from_shape_fn(m, |i| {
        let mut acc = Jet::zero(vars);
        for j in 0..m {
            acc.fma_assign(&frame.ginv[[i, j]], &covec[j]);
        }
        acc
    });
    (v_par, v_n)
}

/// `Gᵃᵢ = ∂ᵢvᵃ + Γ̄ᵃ_bc Fᵇᵢ vᶜ`.
pub fn velocity_gradient(v: &Array1<Jet>, frame: &GeomFrame) -> Array2<Jet> {
    let (n, m) = (frame.n(), frame.m);
    Array2::from_shape_fn((n, m), |(a, i)| {
        let mut acc = v[a].diff(i);
        for b in 0..n {
            for c in 0..n {
                let fv = &frame.f[[b, i]] * &v[c];
                acc.fma_assign(&frame.ambient.christoffel[[a, b, c]], &fv);
            }
        }
        acc
    })
}

/// `g_t(τ)`: the induced metric at time τ in the material chart.
pub fn tau_metric(spec: &MotionSpec, x: &[f64], tau: f64) -> Result<Array2<f64>> {
    Ok(tensor::values(&induced_metric_jets(spec, x, tau)?))
}

fn induced_metric_jets(spec: &MotionSpec, x: &[f64], t: f64) -> Result<Array2<Jet>> {
    let phi = spec.eval_phi(x, t)?;
    let gbar = crate::ambient::ambient_metric_at(spec.ambient(), &phi)?;
    let f = surface::jacobian(&phi, spec.m());
    Ok(surface::induced_metric(&f, &gbar)?.0)
}

/// `δg = ∂ₜg`, `𝒟♭ = ½δg` and `𝒟 = (𝒟♭)♯`, all as jets.
pub fn stretching_metric_route(frame: &GeomFrame) -> (Array2<Jet>, Array2<Jet>, Array2<Jet>) {
    let delta_g = tensor::diff(&frame.g, frame.time_index());
    let d_flat = delta_g.map(|x| x.scale(0.5));
    // 𝒟ⁱⱼ = gⁱᵏ 𝒟♭ₖⱼ (𝒟♭ is symmetric)
    let d = tensor::matmul(&frame.ginv, &d_flat);
    (delta_g, d_flat, d)
}

/// `𝒟 = ½(∇v∥ + ∇v∥*) − vₙS`, adjoint taken with respect to g.
pub fn stretching_kinematic_route(frame: &GeomFrame, v_par: &Array1<Jet>, v_n: &Jet) -> Array2<f64> {
    let m = frame.m;
    let nab = surface::cov_deriv_vector(v_par, &frame.gamma);
    // A e_j = ∇_{e_j} v∥
    let a = Array2::from_shape_fn((m, m), |(i, j)| nab[[j, i]]);
    let g = frame.g_values();
    let ginv = frame.ginv_values();
    let a_adj = ginv.dot(&a.t()).dot(&g);
    (&a + &a_adj) * 0.5 - frame.s_values() * v_n.value()
}

/// `½ ∂_τ C_t(τ)` at τ = t with `C_t(τ) = g(t)⁻¹ g(τ)`.
pub fn cauchy_green_rate(frame: &GeomFrame) -> Array2<f64> {
    let ginv_frozen = frame.ginv_values();
    let ti = frame.time_index();
    let m = frame.m;
    // C as jets with g(t)⁻¹ held fixed, then differentiate in t.
    let c = Array2::from_shape_fn((m, m), |(i, j)| {
        let mut acc = Jet::zero(&frame.vars);
        for k in 0..m {
            acc.axpy_assign(ginv_frozen[[i, k]], &frame.g[[k, j]]);
        }
        acc
    });
    tensor::d1(&c, ti) * 0.5
}

/// The action of the rotation rate on the adapted frame: columns
/// `W(Feᵢ) = Geᵢ − J𝒟eᵢ` for `i < m`, then `W(n) = −J(Sv∥ + ∇vₙ)`.
pub fn rotation_rate_action(
    frame: &GeomFrame,
    grad_v: &Array2<Jet>,
    d: &Array2<f64>,
    v_par: &Array1<f64>,
    grad_v_n: &Array1<f64>,
) -> Array2<f64> {
    let (n, m) = (frame.n(), frame.m);
    let f = frame.f_values();
    let gv = tensor::values(grad_v);
    let mut out = Array2::zeros((n, m + 1));
    let fd = f.dot(d);
    for i in 0..m {
        out.column_mut(i).assign(&(&gv.column(i) - &fd.column(i)));
    }
    let tangent = frame.s_values().dot(v_par) + grad_v_n;
    out.column_mut(m).assign(&(-f.dot(&tangent)));
    out
}

/// `δn` from the rotation rate.
pub fn delta_normal(frame: &GeomFrame, kin: &KinFrame) -> Array1<f64> {
    let tangent = frame.s_values().dot(&kin.v_par_values()) + &kin.grad_v_n;
    -frame.f_values().dot(&tangent)
}

/// `∂ₜn + Γ̄(v, n)`, the covariant time derivative of the normal along the
/// trajectory.
pub fn normal_transport(frame: &GeomFrame, v: &Array1<f64>) -> Array1<f64> {
    let n = frame.n();
    let nv = frame.normal_values();
    let gam = tensor::values(&frame.ambient.christoffel);
    Array1::from_shape_fn(n, |a| {
        let mut s = frame.normal[a].d1(frame.time_index());
        for b in 0..n {
            for c in 0..n {
                s += gam[[a, b, c]] * v[b] * nv[c];
            }
        }
        s
    })
}

/// Largest `|ḡ(Wa, b) + ḡ(a, Wb)|` over the adapted frame `{Fe₁..Feₘ, n}`.
pub fn w_antisymmetry_residual(frame: &GeomFrame, kin: &KinFrame) -> f64 {
    let m = frame.m;
    let f = frame.f_values();
    let nv = frame.normal_values();
    let basis: Vec<Array1<f64>> = (0..m).map(|i| f.column(i).to_owned()).chain(std::iter::once(nv)).collect();
    let mut worst = 0.0_f64;
    for i in 0..=m {
        for j in 0..=m {
            let wa = kin.w_frame.column(i).to_owned();
            let wb = kin.w_frame.column(j).to_owned();
            let r = frame.gbar_dot(&wa, &basis[j]) + frame.gbar_dot(&basis[i], &wb);
            worst = worst.max(r.abs());
        }
    }
    worst
}

/// `|v − (Jv∥ + vₙn)|`.
pub fn split_residual(frame: &GeomFrame, kin: &KinFrame) -> f64 {
    let rebuilt = frame.push_forward(&kin.v_par_values()) + frame.normal_values() * kin.v_n.value();
    tensor::abs_residual(&rebuilt, &kin.v_values())
}

/// `|g(𝒟u, w) − g(u, 𝒟w)|` over coordinate vectors.
pub fn d_symmetry_residual(frame: &GeomFrame, kin: &KinFrame) -> f64 {
    let flat = surface::flat(&kin.d_values(), &frame.g_values());
    tensor::abs_residual(&flat, &flat.t())
}

/// `∂ₜFᵃᵢ + Γ̄ᵃ_bc vᵇ Fᶜᵢ` against `Gᵃᵢ`.
pub fn velocity_gradient_residual(frame: &GeomFrame, kin: &KinFrame) -> f64 {
    let (n, m) = (frame.n(), frame.m);
    let gam = tensor::values(&frame.ambient.christoffel);
    let f = frame.f_values();
    let v = kin.v_values();
    let rate = Array2::from_shape_fn((n, m), |(a, i)| {
        let mut s = frame.f[[a, i]].d1(frame.time_index());
        for b in 0..n {
            for c in 0..n {
                s += gam[[a, b, c]] * v[b] * f[[c, i]];
            }
        }
        s
    });
    tensor::abs_residual(&rate, &tensor::values(&kin.grad_v))
}

/// Central difference in τ with one Richardson step: `(4D_h − D_2h)/3`.
pub fn richardson<D, F>(f: F, t: f64, h: f64) -> Result<ndarray::Array<f64, D>>
where
    D: ndarray::Dimension,
    F: Fn(f64) -> Result<ndarray::Array<f64, D>>,
{
    let d_h = (f(t + h)? - f(t - h)?) / (2.0 * h);
    let d_2h = (f(t + 2.0 * h)? - f(t - 2.0 * h)?) / (4.0 * h);
    Ok((d_h * 4.0 - d_2h) / 3.0)
}

/// δg by finite differences of the τ-metric.
pub fn fd_delta_g(spec: &MotionSpec, x: &[f64], t: f64, h: f64) -> Result<Array2<f64>> {
    richardson(|tau| tau_metric(spec, x, tau), t, h)
}

/// The unit normal at `(X, τ)`.
pub fn normal_at(spec: &MotionSpec, x: &[f64], tau: f64) -> Result<Array1<f64>> {
    let phi = spec.eval_phi(x, tau)?;
    let gbar = crate::ambient::ambient_metric_at(spec.ambient(), &phi)?;
    let gbar_inv = tensor::inverse(&gbar)?;
    let f = surface::jacobian(&phi, spec.m());
    Ok(tensor::values(&surface::unit_normal(&f, &gbar_inv)?))
}

/// δn by finite differences of the normal plus the ambient connection term.
pub fn fd_delta_normal(frame: &GeomFrame, spec: &MotionSpec, h: f64) -> Result<Array1<f64>> {
    let (x, t) = frame.point.split_at(frame.m);
    let dn = richardson(|tau| normal_at(spec, x, tau), t[0], h)?;
    let n = frame.n();
    let nv = frame.normal_values();
    let v: Array1<f64> = frame.phi.iter().map(|p| p.d1(frame.time_index())).collect();
    let gam = tensor::values(&frame.ambient.christoffel);
    Ok(Array1::from_shape_fn(n, |a| {
        let mut s = dn[a];
        for b in 0..n {
            for c in 0..n {
                s += gam[[a, b, c]] * v[b] * nv[c];
            }
        }
        s
    }))
}
