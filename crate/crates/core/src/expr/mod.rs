//! Scalar expressions over chart coordinates.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := atom ('^' integer)?
//! atom   := number | 'x' integer | func '(' expr ')' | '(' expr ')' | '-' atom
//! func   := sin | cos | exp | sqrt
//! ```
//!
//! Note that unary minus binds tighter than `^`: `-x0^2` is `(-x0)^2`.

mod jet;
mod parser;

use std::fmt;

use thiserror::Error;

pub use jet::{basis, Basis, DomainError, Jet, Scalar};
pub use parser::{parse_expr, ParseError, ParseErrorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        match s {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Expression tree. Immutable once built; cheap to share behind `Arc`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Func(Func, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{source} in `{subexpr}`")]
pub struct EvalError {
    pub subexpr: String,
    pub source: DomainError,
}

/// Value, gradient and Hessian of an expression at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: Vec<f64>,
    /// Row-major `n × n`, exactly symmetric.
    pub hess: Vec<f64>,
}

impl Jet2 {
    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn hess_at(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim() + j]
    }

    /// Read value, gradient and Hessian off an order-2 (or higher) jet.
    pub fn from_jet(j: &Jet) -> Jet2 {
        let n = j.nvars();
        let mut hess = vec![0.0; n * n];
        for a in 0..n {
            for b in a..n {
                let h = j.derivative(&[a, b]);
                hess[a * n + b] = h;
                hess[b * n + a] = h;
            }
        }
        Jet2 {
            value: j.value(),
            grad: j.gradient(),
            hess,
        }
    }
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    /// Largest variable index appearing in the tree.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) | Expr::Func(_, a) | Expr::Pow(a, _) => a.max_var(),
            Expr::Bin(_, a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Func(_, a) | Expr::Pow(a, _) => 1 + a.size(),
            Expr::Bin(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Rename variables: `Var(i)` becomes `Var(map(i))`.
    pub fn remap_vars(&self, map: &dyn Fn(usize) -> usize) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(i) => Expr::Var(map(*i)),
            Expr::Neg(a) => Expr::Neg(Box::new(a.remap_vars(map))),
            Expr::Func(f, a) => Expr::Func(*f, Box::new(a.remap_vars(map))),
            Expr::Pow(a, k) => Expr::Pow(Box::new(a.remap_vars(map)), *k),
            Expr::Bin(op, a, b) => Expr::bin(*op, a.remap_vars(map), b.remap_vars(map)),
        }
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    /// Evaluate with each variable bound to a scalar (plain value or jet).
    pub fn eval_with<S: Scalar>(&self, vars: &[S]) -> Result<S, EvalError> {
        let wrap = |e: &Expr, r: Result<S, DomainError>| {
            r.map_err(|source| EvalError {
                subexpr: e.to_string(),
                source,
            })
        };
        match self {
            Expr::Const(c) => Ok(vars
                .first()
                .map(|v| v.constant_like(*c))
                .unwrap_or_else(|| panic!("eval_with needs at least one variable"))),
            Expr::Var(i) => Ok(vars[*i].clone()),
            Expr::Neg(a) => Ok(a.eval_with(vars)?.negated()),
            Expr::Func(f, a) => {
                let x = a.eval_with(vars)?;
                match f {
                    Func::Sin => Ok(x.sin()),
                    Func::Cos => Ok(x.cos()),
                    Func::Exp => Ok(x.exp()),
                    Func::Sqrt => wrap(self, x.sqrt()),
                }
            }
            Expr::Pow(a, k) => {
                let x = a.eval_with(vars)?;
                wrap(self, x.powi(*k))
            }
            Expr::Bin(op, a, b) => {
                let x = a.eval_with(vars)?;
                let y = b.eval_with(vars)?;
                match op {
                    BinOp::Add => Ok(x.plus(&y)),
                    BinOp::Sub => Ok(x.minus(&y)),
                    BinOp::Mul => Ok(x.times(&y)),
                    BinOp::Div => wrap(self, x.divide(&y)),
                }
            }
        }
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        if point.is_empty() {
            return self.eval_with(&[0.0]);
        }
        self.eval_with(point)
    }

    /// Taylor expansion of the given order at `point`.
    pub fn eval_jet(&self, point: &[f64], order: usize) -> Result<Jet, EvalError> {
        self.eval_with(&Jet::variables(point, order))
    }
}

/// Value, exact gradient and exact Hessian of `e` at `p`.
pub fn eval_jet2(e: &Expr, p: &[f64]) -> Result<Jet2, EvalError> {
    Ok(Jet2::from_jet(&e.eval_jet(p, 2)?))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_sum(self, f)
    }
}

fn write_sum(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Bin(op @ (BinOp::Add | BinOp::Sub), a, b) => {
            write_sum(a, f)?;
            f.write_str(if *op == BinOp::Add { " + " } else { " - " })?;
            write_product(b, f)
        }
        _ => write_product(e, f),
    }
}

fn write_product(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Bin(op @ (BinOp::Mul | BinOp::Div), a, b) => {
            write_product(a, f)?;
            f.write_str(if *op == BinOp::Mul { "*" } else { "/" })?;
            write_factor(b, f)
        }
        _ => write_factor(e, f),
    }
}

fn write_factor(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Pow(a, k) => {
            write_atom(a, f)?;
            write!(f, "^{k}")
        }
        _ => write_atom(e, f),
    }
}

fn write_atom(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Const(c) if *c >= 0.0 => write!(f, "{c}"),
        Expr::Const(c) => write!(f, "-{}", -c),
        Expr::Var(i) => write!(f, "x{i}"),
        Expr::Func(func, a) => {
            write!(f, "{}(", func.name())?;
            write_sum(a, f)?;
            f.write_str(")")
        }
        Expr::Neg(a) => {
            f.write_str("-")?;
            write_atom(a, f)
        }
        _ => {
            f.write_str("(")?;
            write_sum(e, f)?;
            f.write_str(")")
        }
    }
}
