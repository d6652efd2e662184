//! Small dense tensor helpers over jets and plain values.
//!
//! Coordinate index `i` of every chart tensor corresponds to jet variable `i`,
//! so `∂ᵢ` is [`Jet::diff`]`(i)`. Extra trailing jet variables (time) are
//! carried along untouched.
//!
//! Index layouts used throughout the crate:
//! * Christoffel symbols `Γᵏᵢⱼ` as `[k, i, j]`;
//! * curvature `Rᵃ_bcd` as `[a, b, c, d]` with `(R(X,Y)Z)ᵃ = Rᵃ_bcd Zᵇ Xᶜ Yᵈ`;
//! * covariant derivatives put the derivative index first, e.g. `(∇ᵢS)ᵏⱼ` as `[i, k, j]`.

use std::sync::Arc;

use ndarray::{Array1, Array2, Array3, Array4, ArrayBase, Data, Dimension};

use crate::jet::{Jet, JetError, VariableSet};

pub fn zeros1(vars: &Arc<VariableSet>, n: usize) -> Array1<Jet> {
    Array1::from_shape_fn(n, |_| Jet::zero(vars))
}

pub fn zeros2(vars: &Arc<VariableSet>, r: usize, c: usize) -> Array2<Jet> {
    Array2::from_shape_fn((r, c), |_| Jet::zero(vars))
}

pub fn zeros3(vars: &Arc<VariableSet>, n: usize) -> Array3<Jet> {
    Array3::from_shape_fn((n, n, n), |_| Jet::zero(vars))
}

pub fn identity(vars: &Arc<VariableSet>, n: usize) -> Array2<Jet> {
    Array2::from_shape_fn((n, n), |(i, j)| Jet::constant(vars, if i == j { 1.0 } else { 0.0 }))
}

/// Values of a jet array.
pub fn values<S, D>(a: &ArrayBase<S, D>) -> ndarray::Array<f64, D>
where
    S: Data<Elem = Jet>,
    D: Dimension,
{
    a.map(Jet::value)
}

/// Elementwise `∂ᵢ`.
pub fn diff<S, D>(a: &ArrayBase<S, D>, i: usize) -> ndarray::Array<Jet, D>
where
    S: Data<Elem = Jet>,
    D: Dimension,
{
    a.map(|x| x.diff(i))
}

/// First partial `∂ᵢ` of every entry, as values.
pub fn d1<S, D>(a: &ArrayBase<S, D>, i: usize) -> ndarray::Array<f64, D>
where
    S: Data<Elem = Jet>,
    D: Dimension,
{
    a.map(|x| x.d1(i))
}

pub fn matmul(a: &Array2<Jet>, b: &Array2<Jet>) -> Array2<Jet> {
    assert_eq!(a.ncols(), b.nrows());
    let vars = a[[0, 0]].vars().clone();
    let mut out = zeros2(&vars, a.nrows(), b.ncols());
    for i in 0..a.nrows() {
        for j in 0..b.ncols() {
            let mut acc = Jet::zero(&vars);
            for k in 0..a.ncols() {
                acc.fma_assign(&a[[i, k]], &b[[k, j]]);
            }
            out[[i, j]] = acc;
        }
    }
    out
}

/// Gauss-Jordan inverse with partial pivoting on values.
pub fn inverse(a: &Array2<Jet>) -> Result<Array2<Jet>, JetError> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let vars = a[[0, 0]].vars().clone();
    let mut m = a.clone();
    let mut inv = identity(&vars, n);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r, &s| m[[r, col]].value().abs().total_cmp(&m[[s, col]].value().abs()))
            .unwrap();
        if m[[piv, col]].value() == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        if piv != col {
            for k in 0..n {
                m.swap([piv, k], [col, k]);
                inv.swap([piv, k], [col, k]);
            }
        }
        let p = m[[col, col]].recip()?;
        for k in 0..n {
            m[[col, k]] = &m[[col, k]] * &p;
            inv[[col, k]] = &inv[[col, k]] * &p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[[r, col]].clone();
            for k in 0..n {
                let dm = &f * &m[[col, k]];
                let di = &f * &inv[[col, k]];
                m[[r, k]] = &m[[r, k]] - &dm;
                inv[[r, k]] = &inv[[r, k]] - &di;
            }
        }
    }
    Ok(inv)
}

pub fn det_values(a: &Array2<f64>) -> f64 {
    let n = a.nrows();
    nalgebra::DMatrix::from_fn(n, n, |i, j| a[[i, j]]).determinant()
}

/// Levi-Civita symbols `Γᵏᵢⱼ = ½ gᵏˡ(∂ᵢg_lj + ∂ⱼg_li − ∂_l gᵢⱼ)`.
pub fn christoffel(g: &Array2<Jet>, ginv: &Array2<Jet>) -> Array3<Jet> {
    let d = g.nrows();
    let vars = g[[0, 0]].vars().clone();
    let dg: Vec<Array2<Jet>> = (0..d).map(|l| diff(g, l)).collect();
    let mut out = zeros3(&vars, d);
    for k in 0..d {
        for i in 0..d {
            for j in i..d {
                let mut acc = Jet::zero(&vars);
                for l in 0..d {
                    let bracket = &(&dg[i][[l, j]] + &dg[j][[l, i]]) - &dg[l][[i, j]];
                    acc.fma_assign(&ginv[[k, l]], &bracket);
                }
                let acc = acc.scale(0.5);
                out[[k, j, i]] = acc.clone();
                out[[k, i, j]] = acc;
            }
        }
    }
    out
}

/// `Rᵃ_bcd = ∂_cΓᵃ_db − ∂_dΓᵃ_cb + Γᵃ_ce Γᵉ_db − Γᵃ_de Γᵉ_cb`.
pub fn riemann(gamma: &Array3<Jet>) -> Array4<Jet> {
    let d = gamma.shape()[0];
    let vars = gamma[[0, 0, 0]].vars().clone();
    let dgam: Vec<Array3<Jet>> = (0..d).map(|c| diff(gamma, c)).collect();
    Array4::from_shape_fn((d, d, d, d), |(a, b, c, dd)| {
        let mut acc = &dgam[c][[a, dd, b]] - &dgam[dd][[a, c, b]];
        let mut quad = Jet::zero(&vars);
        for e in 0..d {
            quad.fma_assign(&gamma[[a, c, e]], &gamma[[e, dd, b]]);
            quad.fma_assign(&(-&gamma[[a, dd, e]]), &gamma[[e, c, b]]);
        }
        acc = &acc + &quad;
        acc
    })
}

/// `R♭_abcd = g_ae Rᵉ_bcd`.
pub fn lower_riemann(r: &Array4<f64>, g: &Array2<f64>) -> Array4<f64> {
    let d = g.nrows();
    Array4::from_shape_fn((d, d, d, d), |(a, b, c, dd)| (0..d).map(|e| g[[a, e]] * r[[e, b, c, dd]]).sum())
}

/// Sectional curvature of the plane spanned by coordinate vectors 0 and 1.
pub fn sectional_curvature(r: &Array4<f64>, g: &Array2<f64>) -> f64 {
    let rf = lower_riemann(r, g);
    let det = g[[0, 0]] * g[[1, 1]] - g[[0, 1]] * g[[1, 0]];
    rf[[0, 1, 0, 1]] / det
}

/// `g`-invariant norm of a (0,2) tensor.
pub fn norm_02(t: &Array2<f64>, ginv: &Array2<f64>) -> f64 {
    let d = t.nrows();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            for a in 0..d {
                for b in 0..d {
                    s += ginv[[i, a]] * ginv[[j, b]] * t[[i, j]] * t[[a, b]];
                }
            }
        }
    }
    s.max(0.0).sqrt()
}

/// `g`-invariant norm of a (0,3) tensor.
pub fn norm_03(t: &Array3<f64>, ginv: &Array2<f64>) -> f64 {
    let d = t.shape()[0];
    // Raise all three indices, then contract.
    let raised = Array3::from_shape_fn((d, d, d), |(a, b, c)| {
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    s += ginv[[a, i]] * ginv[[b, j]] * ginv[[c, k]] * t[[i, j, k]];
                }
            }
        }
        s
    });
    (raised * t).sum().max(0.0).sqrt()
}

/// `g`-invariant norm of a (1,2) tensor laid out `[k, i, j]`.
pub fn norm_12(t: &Array3<f64>, g: &Array2<f64>, ginv: &Array2<f64>) -> f64 {
    let d = t.shape()[0];
    let lowered = Array3::from_shape_fn((d, d, d), |(l, i, j)| (0..d).map(|k| g[[l, k]] * t[[k, i, j]]).sum());
    norm_03(&lowered, ginv)
}

pub fn norm_vec(v: &Array1<f64>, g: &Array2<f64>) -> f64 {
    v.dot(&g.dot(v)).max(0.0).sqrt()
}

pub fn max_abs<S, D>(a: &ArrayBase<S, D>) -> f64
where
    S: Data<Elem = f64>,
    D: Dimension,
{
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Componentwise sup-difference normalized by `1 + max(|a|, |b|)`.
pub fn rel_residual<S1, S2, D>(a: &ArrayBase<S1, D>, b: &ArrayBase<S2, D>) -> f64
where
    S1: Data<Elem = f64>,
    S2: Data<Elem = f64>,
    D: Dimension,
{
    let diff = a.iter().zip(b.iter()).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    diff / (1.0 + max_abs(a).max(max_abs(b)))
}

/// Componentwise sup-difference.
pub fn abs_residual<S1, S2, D>(a: &ArrayBase<S1, D>, b: &ArrayBase<S2, D>) -> f64
where
    S1: Data<Elem = f64>,
    S2: Data<Elem = f64>,
    D: Dimension,
{
    a.iter().zip(b.iter()).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::seed;
    use ndarray::array;

    #[test]
    fn jet_inverse_matches_value_inverse_and_derivative() {
        let vars = VariableSet::new(["a"]).unwrap();
        let a = seed(&vars, &[2.0]).unwrap().remove(0);
        // [[a, 1], [1, 3]] has inverse [[3, -1], [-1, a]] / (3a - 1)
        let m = array![[a.clone(), Jet::constant(&vars, 1.0)], [Jet::constant(&vars, 1.0), Jet::constant(&vars, 3.0)]];
        let inv = inverse(&m).unwrap();
        assert!((inv[[0, 0]].value() - 0.6).abs() < 1e-15);
        // d/da of 3/(3a-1) = -9/(3a-1)^2 = -0.36
        assert!((inv[[0, 0]].d1(0) + 0.36).abs() < 1e-14);
        let prod = values(&matmul(&m, &inv));
        assert!(abs_residual(&prod, &Array2::eye(2)) < 1e-15);
    }

    #[test]
    fn christoffel_of_polar_plane() {
        // g = diag(1, r²): Γ^r_θθ = −r, Γ^θ_rθ = 1/r
        let vars = VariableSet::new(["r", "th"]).unwrap();
        let s = seed(&vars, &[2.0, 0.3]).unwrap();
        let one = Jet::constant(&vars, 1.0);
        let zero = Jet::zero(&vars);
        let g = array![[one.clone(), zero.clone()], [zero.clone(), &s[0] * &s[0]]];
        let gamma = christoffel(&g, &inverse(&g).unwrap());
        assert!((gamma[[0, 1, 1]].value() + 2.0).abs() < 1e-15);
        assert!((gamma[[1, 0, 1]].value() - 0.5).abs() < 1e-15);
        assert!((gamma[[1, 1, 0]].value() - 0.5).abs() < 1e-15);
        let r = values(&riemann(&gamma));
        assert!(max_abs(&r) < 1e-14);
    }

    #[test]
    fn norms_are_invariant_under_rescaled_chart() {
        let g = array![[4.0, 0.0], [0.0, 1.0]];
        let ginv = array![[0.25, 0.0], [0.0, 1.0]];
        // the metric itself has norm sqrt(dim)
        assert!((norm_02(&g, &ginv) - 2f64.sqrt()).abs() < 1e-15);
        assert!((norm_vec(&array![0.5, 0.0], &g) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn residual_normalization() {
        let a = array![1.0, 2.0];
        let b = array![1.0, 2.5];
        assert!((rel_residual(&a, &b) - 0.5 / 3.5).abs() < 1e-15);
        assert_eq!(abs_residual(&a, &b), 0.5);
    }
}
