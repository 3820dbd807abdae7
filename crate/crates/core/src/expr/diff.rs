use super::simplify::{add, call, div, mul, neg, pow, sub};
use super::{Expr, Func};

/// Exact derivative with respect to the free variable.
///
/// Powers with a variable exponent go through `exp(b log a)`, which assumes a
/// positive base.
pub fn differentiate(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::Param(_) => Expr::Const(0.0),
        Expr::Var => Expr::Const(1.0),
        Expr::Neg(a) => neg(differentiate(a)),
        Expr::Add(a, b) => add(differentiate(a), differentiate(b)),
        Expr::Sub(a, b) => sub(differentiate(a), differentiate(b)),
        Expr::Mul(a, b) => add(
            mul(differentiate(a), (**b).clone()),
            mul((**a).clone(), differentiate(b)),
        ),
        Expr::Div(a, b) => {
            let da = differentiate(a);
            let db = differentiate(b);
            sub(
                div(da, (**b).clone()),
                div(mul((**a).clone(), db), pow((**b).clone(), Expr::Const(2.0))),
            )
        }
        Expr::Pow(a, b) => {
            let (a, b) = (&**a, &**b);
            match (a.has_var(), b.has_var()) {
                (false, false) => Expr::Const(0.0),
                (true, false) => mul(
                    mul(b.clone(), pow(a.clone(), sub(b.clone(), Expr::Const(1.0)))),
                    differentiate(a),
                ),
                (false, true) => mul(
                    mul(e.clone(), call(Func::Log, a.clone())),
                    differentiate(b),
                ),
                (true, true) => mul(
                    e.clone(),
                    add(
                        mul(differentiate(b), call(Func::Log, a.clone())),
                        div(mul(b.clone(), differentiate(a)), a.clone()),
                    ),
                ),
            }
        }
        Expr::Call(f, u) => {
            let du = differentiate(u);
            if du.is_zero() {
                return Expr::Const(0.0);
            }
            let u = (**u).clone();
            let outer = match f {
                Func::Log => return div(du, u),
                Func::Exp => e.clone(),
                Func::Sqrt => return div(du, mul(Expr::Const(2.0), e.clone())),
                Func::Abs => div(u.clone(), e.clone()),
                Func::Sinh => call(Func::Cosh, u),
                Func::Cosh => call(Func::Sinh, u),
                // 1 - tanh^2 and 1 - coth^2, written without the cancellation
                Func::Tanh => return div(du, pow(call(Func::Cosh, u), Expr::Const(2.0))),
                Func::Coth => return neg(div(du, pow(call(Func::Sinh, u), Expr::Const(2.0)))),
            };
            mul(outer, du)
        }
    }
}
