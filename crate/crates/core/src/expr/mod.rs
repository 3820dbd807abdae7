//! Symbolic expressions in one free variable with named real parameters.
//!
//! An [`Expr`] is an immutable tree. Parsing, evaluation, differentiation and
//! simplification are pure functions, so expressions can be shared freely
//! across threads.

mod diff;
mod parse;
mod simplify;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parse::{parse, parse_with_var, ParseError};

/// Unary functions known to the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Log,
    Exp,
    Sqrt,
    Abs,
    Sinh,
    Cosh,
    Tanh,
    Coth,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Log,
        Func::Exp,
        Func::Sqrt,
        Func::Abs,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Coth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Log => "log",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Coth => "coth",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Log => {
                if v > 0.0 {
                    v.ln()
                } else {
                    f64::NAN
                }
            }
            Func::Exp => v.exp(),
            Func::Sqrt => {
                if v >= 0.0 {
                    v.sqrt()
                } else {
                    f64::NAN
                }
            }
            Func::Abs => v.abs(),
            Func::Sinh => v.sinh(),
            Func::Cosh => v.cosh(),
            Func::Tanh => v.tanh(),
            Func::Coth => {
                if v == 0.0 {
                    f64::NAN
                } else {
                    1.0 / v.tanh()
                }
            }
        }
    }
}

/// Expression tree over a single anonymous free variable.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Param(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Values for the named parameters of an expression.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamBindings(BTreeMap<String, f64>);

impl ParamBindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.0.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    /// Overlay `other` on top of `self`.
    pub fn merged(&self, other: &ParamBindings) -> ParamBindings {
        let mut out = self.clone();
        for (k, v) in &other.0 {
            out.0.insert(k.clone(), *v);
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<const N: usize> From<[(&str, f64); N]> for ParamBindings {
    fn from(pairs: [(&str, f64); N]) -> Self {
        let mut b = ParamBindings::new();
        for (k, v) in pairs {
            b.set(k, v);
        }
        b
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound parameter `{0}`")]
    Unbound(String),
    #[error("non-finite result in {op} at x = {x}")]
    Domain { op: &'static str, x: f64 },
}

impl Expr {
    pub fn c(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn x() -> Expr {
        Expr::Var
    }

    pub fn param(name: &str) -> Expr {
        Expr::Param(name.to_string())
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    pub fn powe(self, exponent: Expr) -> Expr {
        Expr::Pow(Box::new(self), Box::new(exponent))
    }

    pub fn powf(self, exponent: f64) -> Expr {
        self.powe(Expr::Const(exponent))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 1.0)
    }

    /// True when the free variable occurs anywhere in the tree.
    pub fn has_var(&self) -> bool {
        match self {
            Expr::Var => true,
            Expr::Const(_) | Expr::Param(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.has_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.has_var() || b.has_var()
            }
        }
    }

    /// Names of all parameters occurring in the tree, sorted and deduplicated.
    pub fn params(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e {
                Expr::Param(p) => out.push(p.clone()),
                Expr::Const(_) | Expr::Var => {}
                Expr::Neg(a) | Expr::Call(_, a) => walk(a, out),
                Expr::Add(a, b)
                | Expr::Sub(a, b)
                | Expr::Mul(a, b)
                | Expr::Div(a, b)
                | Expr::Pow(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out.sort();
        out.dedup();
        out
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var | Expr::Param(_) => 1,
            Expr::Neg(a) | Expr::Call(_, a) => 1 + a.node_count(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                1 + a.node_count() + b.node_count()
            }
        }
    }

    /// Evaluate at `x`. Any non-finite intermediate value is reported as a
    /// domain error naming the offending node kind.
    pub fn eval(&self, x: f64, p: &ParamBindings) -> Result<f64, EvalError> {
        check(self.eval_inner(x, p)?, "result", x)
    }

    /// Evaluation that lets an overflowed intermediate through when its
    /// effect on the node is unambiguous (∞·b with |b| ≥ 1, a/∞ → 0,
    /// sinh(∞) = ∞, ...). Ambiguous combinations are domain errors.
    fn eval_inner(&self, x: f64, p: &ParamBindings) -> Result<f64, EvalError> {
        let err = |op| Err(EvalError::Domain { op, x });
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var => x,
            Expr::Param(name) => p.get(name).ok_or_else(|| EvalError::Unbound(name.clone()))?,
            Expr::Neg(a) => -a.eval_inner(x, p)?,
            Expr::Add(a, b) => a.eval_inner(x, p)? + b.eval_inner(x, p)?,
            Expr::Sub(a, b) => a.eval_inner(x, p)? - b.eval_inner(x, p)?,
            Expr::Mul(a, b) => {
                let (u, v) = (a.eval_inner(x, p)?, b.eval_inner(x, p)?);
                if (u.is_infinite() && v.abs() < 1.0) || (v.is_infinite() && u.abs() < 1.0) {
                    return err("mul");
                }
                u * v
            }
            Expr::Div(a, b) => {
                let (u, v) = (a.eval_inner(x, p)?, b.eval_inner(x, p)?);
                let ambiguous = v == 0.0
                    || (v.is_infinite() && u.abs() > 1e292)
                    || (u.is_infinite() && v.abs() > 1.0);
                if ambiguous {
                    return err("div");
                }
                u / v
            }
            Expr::Pow(a, b) => {
                let (u, e) = (a.eval_inner(x, p)?, b.eval_inner(x, p)?);
                if e.is_infinite() || (u == 0.0 && e < 0.0) {
                    return err("pow");
                }
                real_pow(u, e)
            }
            Expr::Call(Func::Log, arg) if matches!(**arg, Expr::Call(Func::Coth, _)) => {
                let Expr::Call(_, inner) = &**arg else { unreachable!() };
                log_coth(inner.eval_inner(x, p)?)
            }
            Expr::Call(f, a) => {
                let u = a.eval_inner(x, p)?;
                let v = f.apply(u);
                if *f == Func::Log && v.is_infinite() {
                    return err("log");
                }
                v
            }
        };
        if v.is_nan() {
            let op = match self {
                Expr::Add(..) => "add",
                Expr::Sub(..) => "sub",
                Expr::Mul(..) => "mul",
                Expr::Div(..) => "div",
                Expr::Pow(..) => "pow",
                Expr::Call(f, _) => f.name(),
                _ => "eval",
            };
            return err(op);
        }
        Ok(v)
    }

    /// Replace every bound parameter by its value and simplify.
    pub fn bind(&self, p: &ParamBindings) -> Expr {
        fn subst(e: &Expr, p: &ParamBindings) -> Expr {
            match e {
                Expr::Param(name) => match p.get(name) {
                    Some(v) => Expr::Const(v),
                    None => e.clone(),
                },
                Expr::Const(_) | Expr::Var => e.clone(),
                Expr::Neg(a) => Expr::Neg(Box::new(subst(a, p))),
                Expr::Call(f, a) => Expr::Call(*f, Box::new(subst(a, p))),
                Expr::Add(a, b) => Expr::Add(Box::new(subst(a, p)), Box::new(subst(b, p))),
                Expr::Sub(a, b) => Expr::Sub(Box::new(subst(a, p)), Box::new(subst(b, p))),
                Expr::Mul(a, b) => Expr::Mul(Box::new(subst(a, p)), Box::new(subst(b, p))),
                Expr::Div(a, b) => Expr::Div(Box::new(subst(a, p)), Box::new(subst(b, p))),
                Expr::Pow(a, b) => Expr::Pow(Box::new(subst(a, p)), Box::new(subst(b, p))),
            }
        }
        simplify(&subst(self, p))
    }

    pub fn differentiate(&self) -> Expr {
        diff::differentiate(self)
    }

    pub fn simplify(&self) -> Expr {
        simplify::simplify(self)
    }

    /// Render with an explicit name for the free variable.
    pub fn render(&self, var: &str) -> String {
        let mut s = String::new();
        render_into(self, var, &mut s);
        s
    }
}

pub fn differentiate(e: &Expr) -> Expr {
    diff::differentiate(e)
}

pub fn simplify(e: &Expr) -> Expr {
    simplify::simplify(e)
}

/// Folding constructors: build nodes while applying the shallow simplification rules.
pub mod build {
    pub use super::simplify::{add, call, div, mul, neg, pow, sub};
}

fn check(v: f64, op: &'static str, x: f64) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::Domain { op, x })
    }
}

pub(crate) fn real_pow(base: f64, exponent: f64) -> f64 {
    if exponent == 2.0 {
        base * base
    } else if exponent.fract() == 0.0 && exponent.abs() <= 64.0 {
        base.powi(exponent as i32)
    } else {
        base.powf(exponent)
    }
}

/// log(coth(u)) for u > 0 without the cancellation of coth(u) -> 1.
fn log_coth(u: f64) -> f64 {
    if u > 0.0 {
        let t = (-2.0 * u).exp();
        if t < 0.5 {
            t.ln_1p() - (-t).ln_1p()
        } else {
            t.ln_1p() - (-(-2.0 * u).exp_m1()).ln()
        }
    } else {
        f64::NAN
    }
}

fn render_into(e: &Expr, var: &str, s: &mut String) {
    use std::fmt::Write;
    let bin = |s: &mut String, a: &Expr, op: char, b: &Expr| {
        s.push('(');
        render_into(a, var, s);
        s.push(op);
        render_into(b, var, s);
        s.push(')');
    };
    match e {
        Expr::Const(c) if *c < 0.0 => {
            let _ = write!(s, "(-{:?})", -c);
        }
        Expr::Const(c) => {
            let _ = write!(s, "{c:?}");
        }
        Expr::Var => s.push_str(var),
        Expr::Param(p) => s.push_str(p),
        Expr::Neg(a) => {
            s.push_str("(-");
            render_into(a, var, s);
            s.push(')');
        }
        Expr::Add(a, b) => bin(s, a, '+', b),
        Expr::Sub(a, b) => bin(s, a, '-', b),
        Expr::Mul(a, b) => bin(s, a, '*', b),
        Expr::Div(a, b) => bin(s, a, '/', b),
        Expr::Pow(a, b) => bin(s, a, '^', b),
        Expr::Call(f, a) => {
            s.push_str(f.name());
            s.push('(');
            render_into(a, var, s);
            s.push(')');
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("x"))
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl std::ops::$trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(self), Box::new(rhs))
            }
        }
        impl std::ops::$trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::$variant(Box::new(self), Box::new(Expr::Const(rhs)))
            }
        }
        impl std::ops::$trait<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(Expr::Const(self)), Box::new(rhs))
            }
        }
    };
}

binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

#[cfg(test)]
pub(crate) mod tests;

impl Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
