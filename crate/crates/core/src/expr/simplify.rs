//! Shallow algebraic clean-up: constant folding and identity elimination.
//! No canonical ordering, no polynomial normal form.

use super::{Expr, Func};

fn folded(v: f64) -> Option<Expr> {
    v.is_finite().then_some(Expr::Const(v))
}

fn konst(e: &Expr) -> Option<f64> {
    match e {
        Expr::Const(c) => Some(*c),
        _ => None,
    }
}

pub fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(-c),
        Expr::Neg(inner) => *inner,
        a => Expr::Neg(Box::new(a)),
    }
}

pub fn add(a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (konst(&a), konst(&b)) {
        if let Some(e) = folded(x + y) {
            return e;
        }
    }
    if a.is_zero() {
        return b;
    }
    if b.is_zero() {
        return a;
    }
    if let Expr::Neg(nb) = b {
        return sub(a, *nb);
    }
    Expr::Add(Box::new(a), Box::new(b))
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (konst(&a), konst(&b)) {
        if let Some(e) = folded(x - y) {
            return e;
        }
    }
    if b.is_zero() {
        return a;
    }
    if a.is_zero() {
        return neg(b);
    }
    if a == b {
        return Expr::Const(0.0);
    }
    if let Expr::Neg(nb) = b {
        return add(a, *nb);
    }
    Expr::Sub(Box::new(a), Box::new(b))
}

pub fn mul(a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (konst(&a), konst(&b)) {
        if let Some(e) = folded(x * y) {
            return e;
        }
    }
    if a.is_zero() || b.is_zero() {
        return Expr::Const(0.0);
    }
    if a.is_one() {
        return b;
    }
    if b.is_one() {
        return a;
    }
    if konst(&a) == Some(-1.0) {
        return neg(b);
    }
    if konst(&b) == Some(-1.0) {
        return neg(a);
    }
    // c1 * (c2 * e) -> (c1 c2) * e
    if let (Some(x), Expr::Mul(l, r)) = (konst(&a), &b) {
        if let Some(y) = konst(l) {
            if let Some(c) = folded(x * y) {
                return mul(c, (**r).clone());
            }
        }
    }
    match (a, b) {
        (Expr::Neg(x), Expr::Neg(y)) => mul(*x, *y),
        (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

pub fn div(a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (konst(&a), konst(&b)) {
        if y != 0.0 {
            if let Some(e) = folded(x / y) {
                return e;
            }
        }
    }
    if a.is_zero() && !b.is_zero() {
        return Expr::Const(0.0);
    }
    if b.is_one() {
        return a;
    }
    // a/a → 1: divisors in this crate are weights assumed non-vanishing
    if a == b && !a.is_zero() {
        return Expr::Const(1.0);
    }
    Expr::Div(Box::new(a), Box::new(b))
}

pub fn pow(a: Expr, b: Expr) -> Expr {
    if b.is_zero() {
        return Expr::Const(1.0);
    }
    if b.is_one() {
        return a;
    }
    if a.is_one() {
        return Expr::Const(1.0);
    }
    if let (Some(x), Some(y)) = (konst(&a), konst(&b)) {
        if let Some(e) = folded(super::real_pow(x, y)) {
            return e;
        }
    }
    Expr::Pow(Box::new(a), Box::new(b))
}

pub fn call(f: Func, a: Expr) -> Expr {
    if let Some(x) = konst(&a) {
        if let Some(e) = folded(f.apply(x)) {
            return e;
        }
    }
    Expr::Call(f, Box::new(a))
}

/// Rebuild bottom-up through the folding constructors.
pub fn simplify(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::Var | Expr::Param(_) => e.clone(),
        Expr::Neg(a) => neg(simplify(a)),
        Expr::Add(a, b) => add(simplify(a), simplify(b)),
        Expr::Sub(a, b) => sub(simplify(a), simplify(b)),
        Expr::Mul(a, b) => mul(simplify(a), simplify(b)),
        Expr::Div(a, b) => div(simplify(a), simplify(b)),
        Expr::Pow(a, b) => pow(simplify(a), simplify(b)),
        Expr::Call(f, a) => call(*f, simplify(a)),
    }
}
