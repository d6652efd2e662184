//! Truncated multivariate Taylor arithmetic ("jets") to total degree 3.
//!
//! A [`Jet`] carries a function value together with every partial derivative
//! up to total order three with respect to an ordered [`VariableSet`].
//! Coefficients are stored *derivative-valued*: the entry for the multi-index
//! `[i, j]` is `∂²f/∂xᵢ∂xⱼ` itself, not the Taylor coefficient. Multi-indices
//! are kept sorted, so mixed partials are symmetric by construction.
//!
//! Each jet also tracks its derivative *headroom* ([`Jet::order`]). Seeds start
//! at order 3, differentiation with [`Jet::diff`] lowers it by one, and binary
//! operations keep the minimum of their operands. Asking for a partial beyond
//! the headroom is an error rather than a silent zero.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use thiserror::Error;

/// Maximum number of independent variables a jet can carry.
pub const MAX_VARS: usize = 8;
/// Fixed truncation degree.
pub const MAX_ORDER: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("variable set must hold between 1 and {MAX_VARS} names, got {0}")]
    VariableCount(usize),
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("invalid variable name `{0}`")]
    InvalidVariable(String),
    #[error("non-finite value {value} for variable `{name}`")]
    NonFinite { name: String, value: f64 },
    #[error("expected {expected} seed values, got {got}")]
    PointLength { expected: usize, got: usize },
    #[error("jets belong to different variable sets")]
    VariableSetMismatch,
    #[error("division by a jet whose value is zero")]
    DivisionByZero,
    #[error("{func} is undefined at {value}")]
    Domain { func: &'static str, value: f64 },
    #[error("multi-index {0:?} is out of range")]
    IndexOutOfRange(Vec<usize>),
    #[error("derivative of order {requested} requested but only {available} are carried")]
    OrderExceeded { requested: usize, available: usize },
    #[error("composition needs {expected} argument jets, got {got}")]
    ComposeArity { expected: usize, got: usize },
    #[error("non-finite result from {0}")]
    NonFiniteResult(&'static str),
}

/// Ordered list of distinct variable names shared by a family of jets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableSet {
    names: Vec<String>,
}

impl VariableSet {
    pub fn new<I, S>(names: I) -> Result<Arc<Self>, JetError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() || names.len() > MAX_VARS {
            return Err(JetError::VariableCount(names.len()));
        }
        for (i, name) in names.iter().enumerate() {
            let mut chars = name.chars();
            let ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
                && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !ok {
                return Err(JetError::InvalidVariable(name.clone()));
            }
            if names[..i].contains(name) {
                return Err(JetError::DuplicateVariable(name.clone()));
            }
        }
        Ok(Arc::new(Self { names }))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Sorted multi-index of total degree at most 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    len: u8,
    idx: [u8; MAX_ORDER],
}

impl MultiIndex {
    pub const EMPTY: MultiIndex = MultiIndex { len: 0, idx: [0; MAX_ORDER] };

    /// Canonicalizes (sorts) the given variable indices.
    pub fn new(indices: &[usize]) -> Result<Self, JetError> {
        if indices.len() > MAX_ORDER || indices.iter().any(|&i| i >= MAX_VARS) {
            return Err(JetError::IndexOutOfRange(indices.to_vec()));
        }
        let mut idx = [0u8; MAX_ORDER];
        for (slot, &i) in idx.iter_mut().zip(indices) {
            *slot = i as u8;
        }
        idx[..indices.len()].sort_unstable();
        Ok(Self { len: indices.len() as u8, idx })
    }

    pub fn degree(&self) -> usize {
        self.len as usize
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.idx[..self.len as usize].iter().map(|&i| i as usize)
    }

    fn push(&self, i: usize) -> Self {
        let mut v: Vec<usize> = self.indices().collect();
        v.push(i);
        Self::new(&v).expect("degree checked by caller")
    }

    /// Product of factorials of the multiplicities (the multi-index factorial).
    fn factorial(&self) -> f64 {
        let mut out = 1.0;
        let mut run = 1;
        for w in 1..self.len as usize {
            if self.idx[w] == self.idx[w - 1] {
                run += 1;
                out *= run as f64;
            } else {
                run = 1;
            }
        }
        out
    }
}

/// Coefficient layout for a given variable count: canonical ordering of
/// multi-indices plus precomputed product and shift tables.
struct Layout {
    indices: Vec<MultiIndex>,
    /// First position of each degree, plus the total length.
    degree_start: [usize; MAX_ORDER + 2],
    lookup: std::collections::HashMap<MultiIndex, usize>,
    /// For each output position, the Leibniz terms `(left, right, weight)`.
    product: Vec<Vec<(u16, u16, f64)>>,
    /// `shift[i][p]`: position of `indices[p] ∪ {i}` (for degree ≤ 2).
    shift: Vec<Vec<usize>>,
}

impl Layout {
    fn build(k: usize) -> Self {
        let mut indices = vec![MultiIndex::EMPTY];
        let mut degree_start = [0usize; MAX_ORDER + 2];
        degree_start[1] = 1;
        for i in 0..k {
            indices.push(MultiIndex::new(&[i]).unwrap());
        }
        degree_start[2] = indices.len();
        for i in 0..k {
            for j in i..k {
                indices.push(MultiIndex::new(&[i, j]).unwrap());
            }
        }
        degree_start[3] = indices.len();
        for i in 0..k {
            for j in i..k {
                for l in j..k {
                    indices.push(MultiIndex::new(&[i, j, l]).unwrap());
                }
            }
        }
        degree_start[4] = indices.len();
        let lookup: std::collections::HashMap<_, _> =
            indices.iter().enumerate().map(|(p, m)| (*m, p)).collect();

        // General Leibniz rule: every derivative in the multiset lands on
        // either factor, so enumerate subsets of positions.
        let mut product = Vec::with_capacity(indices.len());
        for alpha in &indices {
            let items: Vec<usize> = alpha.indices().collect();
            let mut terms: std::collections::BTreeMap<(u16, u16), f64> = Default::default();
            for mask in 0u32..(1 << items.len()) {
                let (mut left, mut right) = (Vec::new(), Vec::new());
                for (bit, &it) in items.iter().enumerate() {
                    if mask & (1 << bit) != 0 {
                        left.push(it);
                    } else {
                        right.push(it);
                    }
                }
                let l = lookup[&MultiIndex::new(&left).unwrap()] as u16;
                let r = lookup[&MultiIndex::new(&right).unwrap()] as u16;
                *terms.entry((l, r)).or_insert(0.0) += 1.0;
            }
            product.push(terms.into_iter().map(|((l, r), w)| (l, r, w)).collect());
        }

        let shift = (0..k)
            .map(|i| {
                indices
                    .iter()
                    .map(|m| if m.degree() < MAX_ORDER { lookup[&m.push(i)] } else { usize::MAX })
                    .collect()
            })
            .collect();

        Self { indices, degree_start, lookup, product, shift }
    }

    fn len(&self) -> usize {
        self.indices.len()
    }

    /// Number of coefficients carrying information at the given order.
    fn len_for_order(&self, order: usize) -> usize {
        self.degree_start[order + 1]
    }
}

fn layout(k: usize) -> &'static Layout {
    static LAYOUTS: [OnceLock<Layout>; MAX_VARS + 1] = [const { OnceLock::new() }; MAX_VARS + 1];
    LAYOUTS[k].get_or_init(|| Layout::build(k))
}

/// Arithmetic operations accepted by [`arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    /// Unary; the second operand is ignored.
    Neg,
}

/// Elementary functions accepted by [`elem`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElemFn {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Pow(f64),
}

impl ElemFn {
    pub fn name(&self) -> &'static str {
        match self {
            ElemFn::Sin => "sin",
            ElemFn::Cos => "cos",
            ElemFn::Tan => "tan",
            ElemFn::Exp => "exp",
            ElemFn::Log => "log",
            ElemFn::Sqrt => "sqrt",
            ElemFn::Pow(_) => "pow",
        }
    }

    /// Scalar evaluation with the same domain rules as the jet version.
    pub fn eval(&self, x: f64) -> Result<f64, JetError> {
        Ok(self.taylor(x)?[0])
    }

    /// Taylor coefficients `f⁽ᵏ⁾(x)/k!` for k = 0..=3.
    fn taylor(&self, x: f64) -> Result<[f64; 4], JetError> {
        let domain = |func| Err(JetError::Domain { func, value: x });
        let c = match *self {
            ElemFn::Sin => {
                let (s, c) = x.sin_cos();
                [s, c, -s / 2.0, -c / 6.0]
            }
            ElemFn::Cos => {
                let (s, c) = x.sin_cos();
                [c, -s, -c / 2.0, s / 6.0]
            }
            ElemFn::Tan => {
                if x.cos().abs() < 1e-300 {
                    return domain("tan");
                }
                let t = x.tan();
                let sec2 = 1.0 + t * t;
                [t, sec2, t * sec2, sec2 * (1.0 + 3.0 * t * t) / 3.0]
            }
            ElemFn::Exp => {
                let e = x.exp();
                [e, e, e / 2.0, e / 6.0]
            }
            ElemFn::Log => {
                if !(x > 0.0) {
                    return domain("log");
                }
                let r = 1.0 / x;
                [x.ln(), r, -r * r / 2.0, r * r * r / 3.0]
            }
            ElemFn::Sqrt => {
                if !(x > 0.0) {
                    return domain("sqrt");
                }
                let s = x.sqrt();
                [s, 0.5 / s, -0.125 / (s * x), 0.0625 / (s * x * x)]
            }
            ElemFn::Pow(p) => pow_taylor(x, p)?,
        };
        if c.iter().all(|v| v.is_finite()) {
            Ok(c)
        } else {
            Err(JetError::NonFiniteResult(self.name()))
        }
    }
}

fn pow_taylor(x: f64, p: f64) -> Result<[f64; 4], JetError> {
    let integer = p.fract() == 0.0 && p.abs() < 1e9;
    if !integer && !(x > 0.0) {
        return Err(JetError::Domain { func: "pow", value: x });
    }
    if integer && p < 0.0 && x == 0.0 {
        return Err(JetError::Domain { func: "pow", value: x });
    }
    let mut out = [0.0; 4];
    let mut falling = 1.0;
    let mut fact = 1.0;
    for (k, slot) in out.iter_mut().enumerate() {
        if k > 0 {
            falling *= p - (k as f64 - 1.0);
            fact *= k as f64;
        }
        if falling == 0.0 {
            break;
        }
        let e = p - k as f64;
        let base = if integer { x.powi(e as i32) } else { x.powf(e) };
        *slot = falling / fact * base;
    }
    Ok(out)
}

/// Value plus all partial derivatives up to total degree 3.
#[derive(Clone, PartialEq)]
pub struct Jet {
    vars: Arc<VariableSet>,
    order: u8,
    d: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lay = layout(self.vars.len());
        let mut s = f.debug_map();
        for (p, m) in lay.indices[..lay.len_for_order(self.order as usize)].iter().enumerate() {
            let key: String = m.indices().map(|i| self.vars.names[i].as_str()).collect::<Vec<_>>().join("");
            let key = if key.is_empty() { "val".to_string() } else { format!("d{key}") };
            s.entry(&key, &self.d[p]);
        }
        s.finish()
    }
}

impl Jet {
    pub fn constant(vars: &Arc<VariableSet>, value: f64) -> Self {
        let mut d = vec![0.0; layout(vars.len()).len()];
        d[0] = value;
        Self { vars: Arc::clone(vars), order: MAX_ORDER as u8, d }
    }

    pub fn zero(vars: &Arc<VariableSet>) -> Self {
        Self::constant(vars, 0.0)
    }

    /// The independent variable `index` evaluated at `value`.
    pub fn variable(vars: &Arc<VariableSet>, index: usize, value: f64) -> Self {
        let mut j = Self::constant(vars, value);
        j.d[1 + index] = 1.0;
        j
    }

    pub fn vars(&self) -> &Arc<VariableSet> {
        &self.vars
    }

    pub fn value(&self) -> f64 {
        self.d[0]
    }

    /// Derivative headroom: the highest total order whose partials are valid.
    pub fn order(&self) -> usize {
        self.order as usize
    }

    /// Partial derivative `∂_idx` (raw derivative, not a Taylor coefficient).
    pub fn derivative(&self, idx: &MultiIndex) -> Result<f64, JetError> {
        let lay = layout(self.vars.len());
        if idx.indices().any(|i| i >= self.vars.len()) {
            return Err(JetError::IndexOutOfRange(idx.indices().collect()));
        }
        if idx.degree() > self.order() {
            return Err(JetError::OrderExceeded { requested: idx.degree(), available: self.order() });
        }
        Ok(self.d[lay.lookup[idx]])
    }

    /// Convenience form of [`Jet::derivative`] taking raw variable indices.
    pub fn partial(&self, idx: &[usize]) -> Result<f64, JetError> {
        self.derivative(&MultiIndex::new(idx)?)
    }

    /// First partial; panics when out of range or without headroom.
    pub fn d1(&self, i: usize) -> f64 {
        assert!(self.order >= 1 && i < self.vars.len(), "no first-order headroom for index {i}");
        self.d[1 + i]
    }

    /// The jet of `∂f/∂xᵢ`, with one less order of headroom.
    pub fn try_diff(&self, i: usize) -> Result<Jet, JetError> {
        if i >= self.vars.len() {
            return Err(JetError::IndexOutOfRange(vec![i]));
        }
        if self.order == 0 {
            return Err(JetError::OrderExceeded { requested: 1, available: 0 });
        }
        let lay = layout(self.vars.len());
        let order = self.order - 1;
        let mut d = vec![0.0; lay.len()];
        for (p, slot) in d[..lay.len_for_order(order as usize)].iter_mut().enumerate() {
            *slot = self.d[lay.shift[i][p]];
        }
        Ok(Jet { vars: Arc::clone(&self.vars), order, d })
    }

    /// Panicking form of [`Jet::try_diff`]; headroom is a static property of
    /// the pipelines that call it.
    pub fn diff(&self, i: usize) -> Jet {
        self.try_diff(i).expect("jet differentiation beyond carried order")
    }

    fn check_same(&self, other: &Jet) -> Result<(), JetError> {
        if Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars {
            Ok(())
        } else {
            Err(JetError::VariableSetMismatch)
        }
    }

    fn active_len(&self, order: u8) -> usize {
        layout(self.vars.len()).len_for_order(order as usize)
    }

    pub fn try_add(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_same(other)?;
        let mut out = self.clone();
        out.order = self.order.min(other.order);
        let n = out.active_len(out.order);
        for (a, b) in out.d[..n].iter_mut().zip(&other.d[..n]) {
            *a += b;
        }
        out.d[n..].iter_mut().for_each(|v| *v = 0.0);
        Ok(out)
    }

    pub fn try_sub(&self, other: &Jet) -> Result<Jet, JetError> {
        self.try_add(&other.neg_ref())
    }

    pub fn try_mul(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_same(other)?;
        let lay = layout(self.vars.len());
        let order = self.order.min(other.order);
        let n = lay.len_for_order(order as usize);
        let mut d = vec![0.0; lay.len()];
        for (p, slot) in d[..n].iter_mut().enumerate() {
            let mut acc = 0.0;
            for &(l, r, w) in &lay.product[p] {
                acc += w * self.d[l as usize] * other.d[r as usize];
            }
            *slot = acc;
        }
        Ok(Jet { vars: Arc::clone(&self.vars), order, d })
    }

    pub fn try_div(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_same(other)?;
        self.try_mul(&other.recip()?)
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        if self.value() == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        self.apply(ElemFn::Pow(-1.0))
    }

    fn neg_ref(&self) -> Jet {
        let mut out = self.clone();
        out.d.iter_mut().for_each(|v| *v = -*v);
        out
    }

    pub fn scale(&self, c: f64) -> Jet {
        let mut out = self.clone();
        out.d.iter_mut().for_each(|v| *v *= c);
        out
    }

    pub fn add_scalar(&self, c: f64) -> Jet {
        let mut out = self.clone();
        out.d[0] += c;
        out
    }

    /// `self += a * b` without an intermediate allocation.
    pub fn fma_assign(&mut self, a: &Jet, b: &Jet) {
        a.check_same(b).and_then(|_| self.check_same(a)).expect("jet variable sets differ");
        let lay = layout(self.vars.len());
        self.order = self.order.min(a.order).min(b.order);
        let n = lay.len_for_order(self.order as usize);
        for p in 0..n {
            let mut acc = 0.0;
            for &(l, r, w) in &lay.product[p] {
                acc += w * a.d[l as usize] * b.d[r as usize];
            }
            self.d[p] += acc;
        }
        self.d[n..].iter_mut().for_each(|v| *v = 0.0);
    }

    /// `self += c * a`.
    pub fn axpy_assign(&mut self, c: f64, a: &Jet) {
        self.check_same(a).expect("jet variable sets differ");
        self.order = self.order.min(a.order);
        let n = self.active_len(self.order);
        for (s, x) in self.d[..n].iter_mut().zip(&a.d[..n]) {
            *s += c * x;
        }
        self.d[n..].iter_mut().for_each(|v| *v = 0.0);
    }

    /// Composes a univariate function through its Taylor expansion at the
    /// current value: `f(a₀ + h) = Σ f⁽ᵏ⁾(a₀)/k! hᵏ`, truncated at degree 3.
    pub fn apply(&self, f: ElemFn) -> Result<Jet, JetError> {
        let c = f.taylor(self.value())?;
        let mut h = self.clone();
        h.d[0] = 0.0;
        let mut out = Jet::constant(&self.vars, c[0]);
        out.order = self.order;
        out.axpy_assign(c[1], &h);
        if self.order >= 2 {
            let h2 = &h * &h;
            out.axpy_assign(c[2], &h2);
            if self.order >= 3 {
                let h3 = &h2 * &h;
                out.axpy_assign(c[3], &h3);
            }
        }
        if out.d.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(JetError::NonFiniteResult(f.name()))
        }
    }

    pub fn sin(&self) -> Result<Jet, JetError> {
        self.apply(ElemFn::Sin)
    }
    pub fn cos(&self) -> Result<Jet, JetError> {
        self.apply(ElemFn::Cos)
    }
    pub fn exp(&self) -> Result<Jet, JetError> {
        self.apply(ElemFn::Exp)
    }
    pub fn sqrt(&self) -> Result<Jet, JetError> {
        self.apply(ElemFn::Sqrt)
    }

    /// Composes `self` (a jet over `n` variables, expanded at the values of
    /// `args`) with the `n` argument jets, producing a jet over the argument
    /// variable set.
    pub fn compose(&self, args: &[Jet]) -> Result<Jet, JetError> {
        Composer::new(args, self.vars.len())?.compose(self)
    }
}

/// Reusable monomial cache for composing many outer jets with the same inner
/// arguments.
pub struct Composer {
    outer_vars: usize,
    order: u8,
    monomials: Vec<Jet>,
    inner_vars: Arc<VariableSet>,
}

impl Composer {
    pub fn new(args: &[Jet], outer_vars: usize) -> Result<Self, JetError> {
        if args.len() != outer_vars || args.is_empty() {
            return Err(JetError::ComposeArity { expected: outer_vars, got: args.len() });
        }
        for a in &args[1..] {
            args[0].check_same(a)?;
        }
        let order = args.iter().map(|a| a.order).min().unwrap();
        let lay = layout(outer_vars);
        let inner_vars = Arc::clone(&args[0].vars);
        let shifts: Vec<Jet> = args
            .iter()
            .map(|a| {
                let mut h = a.clone();
                h.d[0] = 0.0;
                h
            })
            .collect();
        let n = lay.len_for_order(order as usize);
        let mut monomials: Vec<Jet> = Vec::with_capacity(n);
        monomials.push(Jet::constant(&inner_vars, 1.0));
        for p in 1..n {
            let m = lay.indices[p];
            let idx: Vec<usize> = m.indices().collect();
            let last = *idx.last().unwrap();
            let parent = lay.lookup[&MultiIndex::new(&idx[..idx.len() - 1])?];
            monomials.push(&monomials[parent] * &shifts[last]);
        }
        Ok(Self { outer_vars, order, monomials, inner_vars })
    }

    pub fn compose(&self, outer: &Jet) -> Result<Jet, JetError> {
        if outer.vars.len() != self.outer_vars {
            return Err(JetError::ComposeArity { expected: outer.vars.len(), got: self.outer_vars });
        }
        let lay = layout(self.outer_vars);
        let order = self.order.min(outer.order);
        let mut out = Jet::zero(&self.inner_vars);
        for p in 0..lay.len_for_order(order as usize) {
            let c = outer.d[p] / lay.indices[p].factorial();
            if c != 0.0 {
                out.axpy_assign(c, &self.monomials[p]);
            }
        }
        out.order = order;
        let n = out.active_len(order);
        out.d[n..].iter_mut().for_each(|v| *v = 0.0);
        Ok(out)
    }
}

/// One jet per variable: value from `point`, unit first partial on itself.
pub fn seed(vars: &Arc<VariableSet>, point: &[f64]) -> Result<Vec<Jet>, JetError> {
    if point.len() != vars.len() {
        return Err(JetError::PointLength { expected: vars.len(), got: point.len() });
    }
    point
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if x.is_finite() {
                Ok(Jet::variable(vars, i, x))
            } else {
                Err(JetError::NonFinite { name: vars.names[i].clone(), value: x })
            }
        })
        .collect()
}

pub fn arith(op: ArithOp, a: &Jet, b: &Jet) -> Result<Jet, JetError> {
    match op {
        ArithOp::Add => a.try_add(b),
        ArithOp::Sub => a.try_sub(b),
        ArithOp::Mul => a.try_mul(b),
        ArithOp::Div => a.try_div(b),
        ArithOp::Neg => Ok(a.neg_ref()),
    }
}

pub fn elem(f: ElemFn, a: &Jet) -> Result<Jet, JetError> {
    a.apply(f)
}

/// Partial derivative of `a` along the (sorted) multi-index `idx`.
pub fn extract(a: &Jet, idx: &[usize]) -> Result<f64, JetError> {
    a.partial(idx)
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $inner:ident) => {
        impl $tr<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                self.$inner(rhs).expect("jet variable sets differ")
            }
        }
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$method(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.neg_ref()
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.neg_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x_vars() -> Arc<VariableSet> {
        VariableSet::new(["x"]).unwrap()
    }

    #[test]
    fn seed_identity() {
        let v = x_vars();
        let x = &seed(&v, &[2.0]).unwrap()[0];
        assert_eq!(x.value(), 2.0);
        assert_eq!(x.partial(&[0]).unwrap(), 1.0);
        assert_eq!(x.partial(&[0, 0]).unwrap(), 0.0);
    }

    #[test]
    fn seed_three_vars_single_unit() {
        let v = VariableSet::new(["u", "v", "t"]).unwrap();
        let jets = seed(&v, &[0.3927, 0.3927, 1.0]).unwrap();
        for (i, j) in jets.iter().enumerate() {
            for k in 0..3 {
                assert_eq!(j.partial(&[k]).unwrap(), if i == k { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn seed_rejects_nan() {
        assert!(matches!(seed(&x_vars(), &[f64::NAN]), Err(JetError::NonFinite { .. })));
    }

    #[test]
    fn variable_set_validation() {
        assert!(VariableSet::new(Vec::<String>::new()).is_err());
        assert!(VariableSet::new(["u", "u"]).is_err());
        assert!(VariableSet::new(["1u"]).is_err());
        assert!(VariableSet::new(["a", "b", "c", "d", "e", "f", "g", "h", "i"]).is_err());
    }

    #[test]
    fn square_has_vanishing_third_derivative() {
        let v = x_vars();
        let x = Jet::variable(&v, 0, 3.0);
        let sq = arith(ArithOp::Mul, &x, &x).unwrap();
        assert_eq!(sq.value(), 9.0);
        assert_eq!(sq.partial(&[0]).unwrap(), 6.0);
        assert_eq!(sq.partial(&[0, 0]).unwrap(), 2.0);
        assert_eq!(sq.partial(&[0, 0, 0]).unwrap(), 0.0);
    }

    #[test]
    fn reciprocal_matches_finite_differences() {
        // Central differences of 1/x at x = 2 with Richardson extrapolation;
        // the frozen values below were produced by this oracle.
        let f = |x: f64| 1.0 / x;
        let fd = |h: f64, k: usize| -> f64 {
            match k {
                1 => (f(2.0 + h) - f(2.0 - h)) / (2.0 * h),
                2 => (f(2.0 + h) - 2.0 * f(2.0) + f(2.0 - h)) / (h * h),
                _ => (f(2.0 + 2.0 * h) - 2.0 * f(2.0 + h) + 2.0 * f(2.0 - h) - f(2.0 - 2.0 * h)) / (2.0 * h * h * h),
            }
        };
        let rich = |h: f64, k| (4.0 * fd(h / 2.0, k) - fd(h, k)) / 3.0;
        let expected = [0.5, -0.25, 0.25, -0.375];
        assert!((rich(1e-3, 1) - expected[1]).abs() < 1e-9);
        assert!((rich(1e-3, 2) - expected[2]).abs() < 1e-6);
        assert!((rich(1e-2, 3) - expected[3]).abs() < 1e-5);

        let v = x_vars();
        let q = arith(ArithOp::Div, &Jet::constant(&v, 1.0), &Jet::variable(&v, 0, 2.0)).unwrap();
        for (k, e) in expected.iter().enumerate() {
            let idx = vec![0; k];
            assert!((q.partial(&idx).unwrap() - e).abs() < 1e-15, "order {k}");
        }
    }

    #[test]
    fn division_by_zero_value() {
        let v = x_vars();
        let z = Jet::variable(&v, 0, 0.0);
        assert_eq!(arith(ArithOp::Div, &Jet::constant(&v, 1.0), &z), Err(JetError::DivisionByZero));
    }

    #[test]
    fn sin_and_exp_maclaurin() {
        let v = x_vars();
        let x = Jet::variable(&v, 0, 0.0);
        let s = elem(ElemFn::Sin, &x).unwrap();
        assert_eq!([s.value(), s.partial(&[0]).unwrap(), s.partial(&[0, 0]).unwrap()], [0.0, 1.0, 0.0]);
        assert_eq!(extract(&s, &[0, 0, 0]).unwrap(), -1.0);
        let e = elem(ElemFn::Exp, &x).unwrap();
        for k in 0..=3 {
            assert_eq!(e.partial(&vec![0; k]).unwrap(), 1.0);
        }
    }

    #[test]
    fn domain_errors() {
        let v = x_vars();
        assert!(matches!(elem(ElemFn::Log, &Jet::variable(&v, 0, -1.0)), Err(JetError::Domain { .. })));
        assert!(matches!(elem(ElemFn::Sqrt, &Jet::variable(&v, 0, 0.0)), Err(JetError::Domain { .. })));
        assert!(matches!(elem(ElemFn::Pow(0.5), &Jet::variable(&v, 0, -1.0)), Err(JetError::Domain { .. })));
        // Integer powers are fine anywhere.
        let c = elem(ElemFn::Pow(3.0), &Jet::variable(&v, 0, -2.0)).unwrap();
        assert_eq!([c.value(), c.d1(0), c.partial(&[0, 0]).unwrap(), c.partial(&[0, 0, 0]).unwrap()], [-8.0, 12.0, -12.0, 6.0]);
        let sq = elem(ElemFn::Pow(2.0), &Jet::variable(&v, 0, 0.0)).unwrap();
        assert_eq!(sq.partial(&[0, 0]).unwrap(), 2.0);
    }

    #[test]
    fn extract_cases() {
        let v = x_vars();
        assert_eq!(extract(&Jet::constant(&v, 5.0), &[0]).unwrap(), 0.0);
        assert!(matches!(extract(&Jet::constant(&v, 5.0), &[1]), Err(JetError::IndexOutOfRange(_))));
        assert!(matches!(extract(&Jet::constant(&v, 5.0), &[0, 0, 0, 0]), Err(JetError::IndexOutOfRange(_))));
    }

    #[test]
    fn headroom_tracking() {
        let v = VariableSet::new(["u", "t"]).unwrap();
        let u = Jet::variable(&v, 0, 0.5);
        let f = (&u * &u).sin().unwrap();
        let fu = f.diff(0);
        assert_eq!(fu.order(), 2);
        assert!(matches!(fu.partial(&[0, 0, 1]), Err(JetError::OrderExceeded { .. })));
        assert_eq!(fu.partial(&[0, 1]).unwrap(), f.partial(&[0, 0, 1]).unwrap());
        let mixed = &fu * &u;
        assert_eq!(mixed.order(), 2);
        let z = fu.diff(0).diff(1);
        assert_eq!(z.order(), 0);
        assert!(z.try_diff(0).is_err());
    }

    #[test]
    fn mismatched_sets() {
        let a = Jet::constant(&VariableSet::new(["u"]).unwrap(), 1.0);
        let b = Jet::constant(&VariableSet::new(["v"]).unwrap(), 1.0);
        assert_eq!(a.try_add(&b), Err(JetError::VariableSetMismatch));
        assert_eq!(arith(ArithOp::Mul, &a, &b), Err(JetError::VariableSetMismatch));
    }

    #[test]
    fn composition_matches_direct_evaluation() {
        // G(x, y) = sin(x) * y²  composed with x = u·t, y = u + t.
        let xy = VariableSet::new(["x", "y"]).unwrap();
        let ut = VariableSet::new(["u", "t"]).unwrap();
        let (u0, t0) = (0.7, 1.3);
        let inner = seed(&ut, &[u0, t0]).unwrap();
        let x = &inner[0] * &inner[1];
        let y = &inner[0] + &inner[1];
        let direct = &x.sin().unwrap() * &(&y * &y);
        let outer_seed = seed(&xy, &[x.value(), y.value()]).unwrap();
        let g = &outer_seed[0].sin().unwrap() * &(&outer_seed[1] * &outer_seed[1]);
        let composed = g.compose(&[x, y]).unwrap();
        for idx in [vec![], vec![0], vec![1], vec![0, 1], vec![1, 1], vec![0, 0, 1], vec![0, 1, 1], vec![1, 1, 1]] {
            let a = direct.partial(&idx).unwrap();
            let b = composed.partial(&idx).unwrap();
            assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()), "{idx:?}: {a} vs {b}");
        }
    }

    #[test]
    fn tan_third_derivative() {
        let v = x_vars();
        let t = Jet::variable(&v, 0, 0.4).apply(ElemFn::Tan).unwrap();
        let s = 1.0 / 0.4f64.cos().powi(2);
        let tn = 0.4f64.tan();
        assert!((t.partial(&[0, 0, 0]).unwrap() - (2.0 * s * (1.0 + 3.0 * tn * tn))).abs() < 1e-12);
    }
}
