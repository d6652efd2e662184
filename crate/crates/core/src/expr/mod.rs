//! The motion/metric expression language.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' literal)?
//! primary := number | 'pi' | ident | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | tan | exp | log | sqrt
//! ```
//!
//! Exponents must be (optionally negated) number literals. Implicit
//! multiplication is not accepted. Angles are radians.

mod lexer;
mod parser;

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use thiserror::Error;

use crate::jet::{ElemFn, Jet, JetError, VariableSet};

pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse, parse_str, BinOp, Expr, Func};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("illegal character '{ch}' at offset {offset}")]
    IllegalCharacter { ch: char, offset: usize },
    #[error("malformed number at offset {offset}")]
    MalformedNumber { offset: usize },
    #[error("unbalanced parenthesis at offset {offset}")]
    UnbalancedParen { offset: usize },
    #[error("unexpected end of expression at offset {offset}")]
    UnexpectedEnd { offset: usize },
    #[error("unexpected token `{lexeme}` at offset {offset}")]
    UnexpectedToken { lexeme: String, offset: usize },
    #[error("trailing tokens starting at offset {offset}")]
    TrailingTokens { offset: usize },
    #[error("unknown function `{name}` at offset {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("function `{name}` takes exactly one argument (offset {offset})")]
    Arity { name: String, offset: usize },
    #[error("exponent at offset {offset} must be a number literal")]
    NonLiteralExponent { offset: usize },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("variable `{name}` is not allowed here (allowed: {allowed})")]
    DisallowedVariable { name: String, allowed: String },
    #[error("all bound jets must share one variable set")]
    MixedVariableSets,
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// Variable bindings for jet evaluation. Every bound jet shares `vars`.
#[derive(Debug, Clone)]
pub struct JetEnv {
    vars: Arc<VariableSet>,
    bindings: HashMap<String, Jet>,
}

impl JetEnv {
    pub fn new(vars: &Arc<VariableSet>) -> Self {
        Self { vars: Arc::clone(vars), bindings: HashMap::new() }
    }

    /// Binds each name of the variable set to its seeded jet.
    pub fn seeded(vars: &Arc<VariableSet>, point: &[f64]) -> Result<Self, JetError> {
        let jets = crate::jet::seed(vars, point)?;
        let mut env = Self::new(vars);
        for (name, j) in vars.names().iter().zip(jets) {
            env.bindings.insert(name.clone(), j);
        }
        Ok(env)
    }

    pub fn bind(&mut self, name: impl Into<String>, jet: Jet) -> Result<(), ExprError> {
        if jet.vars() != &self.vars {
            return Err(ExprError::MixedVariableSets);
        }
        self.bindings.insert(name.into(), jet);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Jet> {
        self.bindings.get(name)
    }

    pub fn vars(&self) -> &Arc<VariableSet> {
        &self.vars
    }
}

/// Structural fold of `e` into jet arithmetic.
pub fn eval_jet(e: &Expr, env: &JetEnv) -> Result<Jet, ExprError> {
    Ok(match e {
        Expr::Num(v) => Jet::constant(&env.vars, *v),
        Expr::Pi => Jet::constant(&env.vars, std::f64::consts::PI),
        Expr::Var(name) => env.get(name).cloned().ok_or_else(|| ExprError::UnboundVariable(name.clone()))?,
        Expr::Neg(a) => -eval_jet(a, env)?,
        Expr::Bin(op, a, b) => {
            let (a, b) = (eval_jet(a, env)?, eval_jet(b, env)?);
            match op {
                BinOp::Add => a.try_add(&b)?,
                BinOp::Sub => a.try_sub(&b)?,
                BinOp::Mul => a.try_mul(&b)?,
                BinOp::Div => a.try_div(&b)?,
            }
        }
        Expr::Pow(a, p) => eval_jet(a, env)?.apply(ElemFn::Pow(*p))?,
        Expr::Call(f, a) => eval_jet(a, env)?.apply(f.elem())?,
    })
}

/// Plain scalar evaluation with the same domain rules as [`eval_jet`].
pub fn eval_f64(e: &Expr, env: &HashMap<&str, f64>) -> Result<f64, ExprError> {
    Ok(match e {
        Expr::Num(v) => *v,
        Expr::Pi => std::f64::consts::PI,
        Expr::Var(name) => *env.get(name.as_str()).ok_or_else(|| ExprError::UnboundVariable(name.clone()))?,
        Expr::Neg(a) => -eval_f64(a, env)?,
        Expr::Bin(op, a, b) => {
            let (a, b) = (eval_f64(a, env)?, eval_f64(b, env)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(JetError::DivisionByZero.into());
                    }
                    a / b
                }
            }
        }
        Expr::Pow(a, p) => ElemFn::Pow(*p).eval(eval_f64(a, env)?)?,
        Expr::Call(f, a) => f.elem().eval(eval_f64(a, env)?)?,
    })
}

pub fn free_vars(e: &Expr) -> BTreeSet<String> {
    fn walk(e: &Expr, out: &mut BTreeSet<String>) {
        match e {
            Expr::Var(n) => {
                out.insert(n.clone());
            }
            Expr::Num(_) | Expr::Pi => {}
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => walk(a, out),
            Expr::Bin(_, a, b) => {
                walk(a, out);
                walk(b, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    walk(e, &mut out);
    out
}

/// Checks that every free variable of `e` is in `allowed`; the error names
/// the first offender.
pub fn validate_vars(e: &Expr, allowed: &[&str]) -> Result<(), ExprError> {
    match free_vars(e).into_iter().find(|v| !allowed.contains(&v.as_str())) {
        Some(name) => Err(ExprError::DisallowedVariable { name, allowed: allowed.join(",") }),
        None => Ok(()),
    }
}

impl Expr {
    /// Replaces variable-free subtrees by their numeric value. Subtrees that
    /// would raise a domain error are left untouched.
    pub fn fold_constants(&self) -> Expr {
        let folded = match self {
            Expr::Num(_) | Expr::Var(_) | Expr::Pi => return self.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.fold_constants())),
            Expr::Bin(op, a, b) => Expr::bin(*op, a.fold_constants(), b.fold_constants()),
            Expr::Pow(a, p) => Expr::Pow(Box::new(a.fold_constants()), *p),
            Expr::Call(f, a) => Expr::call(*f, a.fold_constants()),
        };
        if free_vars(&folded).is_empty() {
            if let Ok(v) = eval_f64(&folded, &HashMap::new()) {
                return Expr::Num(v);
            }
        }
        folded
    }
}
