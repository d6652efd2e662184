use std::fmt;

use super::lexer::{Token, TokenKind};
use super::ExprError;
use crate::jet::ElemFn;

/// Built-in single-argument functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        self.elem().name()
    }

    pub fn elem(&self) -> ElemFn {
        match self {
            Func::Sin => ElemFn::Sin,
            Func::Cos => ElemFn::Cos,
            Func::Tan => ElemFn::Tan,
            Func::Exp => ElemFn::Exp,
            Func::Log => ElemFn::Log,
            Func::Sqrt => ElemFn::Sqrt,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    /// The named constant `pi`.
    Pi,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    /// Constant power; the exponent is always a literal.
    Pow(Box<Expr>, f64),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }
    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }
    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }
}

/// Parses a token stream into an expression tree.
///
/// Precedence from tightest to loosest: `^` (right-associative, literal
/// exponent only), unary `-`, `* /`, `+ -`. So `-u^2` is `-(u^2)`.
pub fn parse(tokens: &[Token]) -> Result<Expr, ExprError> {
    let mut p = Parser {
        tokens,
        pos: 0,
        end: tokens.last().map_or(0, |t| t.offset + t.lexeme.len()),
        open: Vec::new(),
    };
    let e = p.expr()?;
    if let Some(tok) = p.peek() {
        return Err(match tok.kind {
            TokenKind::RParen => ExprError::UnbalancedParen { offset: tok.offset },
            _ => ExprError::TrailingTokens { offset: tok.offset },
        });
    }
    Ok(e)
}

/// Tokenizes and parses in one step.
pub fn parse_str(src: &str) -> Result<Expr, ExprError> {
    parse(&super::lexer::tokenize(src)?)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    end: usize,
    // Offsets of currently open parentheses.
    open: Vec<usize>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.pos);
        self.pos += 1;
        t
    }

    fn at(&self, kind: TokenKind) -> bool {
        self.peek().is_some_and(|t| t.kind == kind)
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.end, |t| t.offset)
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().map(|t| t.kind) {
                Some(TokenKind::Plus) => BinOp::Add,
                Some(TokenKind::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::bin(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().map(|t| t.kind) {
                Some(TokenKind::Star) => BinOp::Mul,
                Some(TokenKind::Slash) => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::bin(op, lhs, self.unary()?);
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.at(TokenKind::Minus) {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if !self.at(TokenKind::Caret) {
            return Ok(base);
        }
        self.bump();
        let offset = self.offset();
        let exponent = match self.unary()? {
            Expr::Num(v) => v,
            Expr::Neg(inner) => match *inner {
                Expr::Num(v) => -v,
                _ => return Err(ExprError::NonLiteralExponent { offset }),
            },
            _ => return Err(ExprError::NonLiteralExponent { offset }),
        };
        Ok(Expr::Pow(Box::new(base), exponent))
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let offset = self.offset();
        let Some(tok) = self.bump() else {
            return Err(match self.open.last() {
                Some(&o) => ExprError::UnbalancedParen { offset: o },
                None => ExprError::UnexpectedEnd { offset },
            });
        };
        match tok.kind {
            TokenKind::Number(v) => Ok(Expr::Num(v)),
            TokenKind::LParen => {
                self.open.push(tok.offset);
                let inner = self.expr()?;
                self.open.pop();
                if !self.at(TokenKind::RParen) {
                    return Err(self.missing_close(tok.offset));
                }
                self.bump();
                Ok(inner)
            }
            TokenKind::Identifier => {
                if self.at(TokenKind::LParen) {
                    let func = Func::from_name(&tok.lexeme)
                        .ok_or_else(|| ExprError::UnknownFunction { name: tok.lexeme.clone(), offset: tok.offset })?;
                    let open = self.bump().unwrap().offset;
                    if self.at(TokenKind::RParen) {
                        return Err(ExprError::Arity { name: tok.lexeme.clone(), offset: tok.offset });
                    }
                    self.open.push(open);
                    let arg = self.expr()?;
                    self.open.pop();
                    if self.at(TokenKind::Comma) {
                        return Err(ExprError::Arity { name: tok.lexeme.clone(), offset: tok.offset });
                    }
                    if !self.at(TokenKind::RParen) {
                        return Err(self.missing_close(open));
                    }
                    self.bump();
                    Ok(Expr::call(func, arg))
                } else if Func::from_name(&tok.lexeme).is_some() {
                    Err(ExprError::Arity { name: tok.lexeme.clone(), offset: tok.offset })
                } else if tok.lexeme == "pi" {
                    Ok(Expr::Pi)
                } else {
                    Ok(Expr::Var(tok.lexeme.clone()))
                }
            }
            // Inside a group a `)` here is a missing operand, not an imbalance.
            TokenKind::RParen if self.open.is_empty() => Err(ExprError::UnbalancedParen { offset: tok.offset }),
            _ => Err(ExprError::UnexpectedToken { lexeme: tok.lexeme.clone(), offset: tok.offset }),
        }
    }

    fn missing_close(&self, open: usize) -> ExprError {
        match self.peek() {
            None => ExprError::UnbalancedParen { offset: open },
            Some(t) => ExprError::UnexpectedToken { lexeme: t.lexeme.clone(), offset: t.offset },
        }
    }
}

// Binding strength used by the printer.
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Pow(..) => 4,
        _ => 5,
    }
}

fn fmt_num(v: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if v < 0.0 {
        write!(f, "(-{})", -v)
    } else {
        write!(f, "{v}")
    }
}

/// Canonical printer: minimal parentheses, re-parses to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |e: &Expr, min: u8, f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if prec(e) < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Num(v) => fmt_num(*v, f),
            Expr::Var(name) => f.write_str(name),
            Expr::Pi => f.write_str("pi"),
            Expr::Neg(a) => {
                f.write_str("-")?;
                wrap(a, 3, f)
            }
            Expr::Bin(op, a, b) => {
                let (p, sym) = match op {
                    BinOp::Add => (1, " + "),
                    BinOp::Sub => (1, " - "),
                    BinOp::Mul => (2, "*"),
                    BinOp::Div => (2, "/"),
                };
                wrap(a, p, f)?;
                f.write_str(sym)?;
                // Left-associative: the right operand needs a strictly tighter binding.
                wrap(b, p + 1, f)
            }
            Expr::Pow(a, e) => {
                wrap(a, 5, f)?;
                f.write_str("^")?;
                fmt_num(*e, f)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
