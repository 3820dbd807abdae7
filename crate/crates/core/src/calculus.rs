//! Radial operators on positive profiles φ(x):
//!
//! J^d(φ) = ¼(φ'/φ)² − ½ φ''/φ − (d−1)/(2x) · φ'/φ
//!
//! which is the radial form of I(φ) = ¼|∇φ|²/φ² − ½Δφ/φ in dimension d.

use crate::expr::build::{add, div, mul, pow, sub};
use crate::expr::{EvalError, Expr, ParamBindings};
use crate::par;

/// Operator dimension. Real values ≥ 1 are allowed; d = 1 drops the drift term.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct DimensionedOperatorConfig {
    pub d: f64,
}

impl DimensionedOperatorConfig {
    pub fn new(d: f64) -> Option<Self> {
        (d >= 1.0 && d.is_finite()).then_some(Self { d })
    }
}

/// φ'/φ, symbolically.
pub fn log_derivative(phi: &Expr) -> Expr {
    log_deriv(phi).simplify()
}

/// φ'/φ assembled node by node, so that ratios like (sinh^k)'/sinh^k come out
/// as k·coth instead of a quotient of two overflowing terms.
fn log_deriv(phi: &Expr) -> Expr {
    use crate::expr::build::{call, neg};
    use crate::expr::Func;
    if !phi.has_var() {
        return Expr::c(0.0);
    }
    match phi {
        Expr::Var => div(Expr::c(1.0), Expr::x()),
        Expr::Neg(a) => log_deriv(a),
        Expr::Mul(a, b) => add(log_deriv(a), log_deriv(b)),
        Expr::Div(a, b) => sub(log_deriv(a), log_deriv(b)),
        Expr::Pow(a, b) if !b.has_var() => mul((**b).clone(), log_deriv(a)),
        Expr::Pow(a, b) => add(
            mul(b.differentiate(), call(Func::Log, (**a).clone())),
            mul((**b).clone(), log_deriv(a)),
        ),
        Expr::Call(f, u) => {
            let du = u.differentiate();
            let u = (**u).clone();
            match f {
                Func::Exp => du,
                Func::Sinh => mul(du, call(Func::Coth, u)),
                Func::Cosh => mul(du, call(Func::Tanh, u)),
                Func::Tanh => div(du, mul(call(Func::Sinh, u.clone()), call(Func::Cosh, u))),
                Func::Coth => neg(div(du, mul(call(Func::Sinh, u.clone()), call(Func::Cosh, u)))),
                Func::Sqrt => mul(Expr::c(0.5), log_deriv(&u)),
                Func::Abs => log_deriv(&u),
                Func::Log => div(log_deriv(&u), phi.clone()),
            }
        }
        _ => div(phi.differentiate(), phi.clone()),
    }
}

/// J^d(φ) = ¼(φ'/φ)² − ½φ''/φ − (d−1)/(2x)·φ'/φ, evaluated through L = φ'/φ as
/// −¼L² − ½L' − (d−1)/(2x)·L.
pub fn j_op(phi: &Expr, d: f64) -> Expr {
    let l = log_deriv(phi).simplify();
    let core = sub(
        mul(Expr::c(-0.25), pow(l.clone(), Expr::c(2.0))),
        mul(Expr::c(0.5), l.differentiate()),
    );
    let drift = mul(Expr::c(0.5 * (d - 1.0)), div(l, Expr::x()));
    sub(core, drift).simplify()
}

/// Radial reduction of I(φ); identical to [`j_op`].
pub fn i_radial(phi: &Expr, d: f64) -> Expr {
    j_op(phi, d)
}

/// Largest absolute value of `f` over `grid`; the first evaluation error wins.
pub(crate) fn max_abs_over<F>(grid: &[f64], f: F) -> Result<f64, EvalError>
where
    F: Fn(f64) -> Result<f64, EvalError> + Sync + Send,
{
    let vals = par::map(grid, |&x| f(x));
    let mut worst = 0.0f64;
    for v in vals {
        worst = worst.max(v?.abs());
    }
    Ok(worst)
}

/// max over grid of |J^d(φψ) − J^d(φ) − J^d(ψ) + ½(φ'/φ)(ψ'/ψ)|.
pub fn product_rule_residual(
    phi: &Expr,
    psi: &Expr,
    d: f64,
    grid: &[f64],
    p: &ParamBindings,
) -> Result<f64, EvalError> {
    let lhs = j_op(&(phi.clone() * psi.clone()), d);
    let rhs = sub(
        add(j_op(phi, d), j_op(psi, d)),
        mul(Expr::c(0.5), mul(log_derivative(phi), log_derivative(psi))),
    );
    max_abs_over(grid, |x| Ok(lhs.eval(x, p)? - rhs.eval(x, p)?))
}

/// max over grid of |(J^d(h) − J^d(V)) − (J¹(h x^{d−1}) − J¹(V x^{d−1}))|.
pub fn dimension_shift_residual(
    h: &Expr,
    v: &Expr,
    d: f64,
    grid: &[f64],
    p: &ParamBindings,
) -> Result<f64, EvalError> {
    let lhs = sub(j_op(h, d), j_op(v, d));
    let vol = Expr::x().powf(d - 1.0);
    let rhs = sub(j_op(&(h.clone() * vol.clone()), 1.0), j_op(&(v.clone() * vol), 1.0));
    max_abs_over(grid, |x| Ok(lhs.eval(x, p)? - rhs.eval(x, p)?))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::expr::tests::safe_expr;
    use crate::expr::{parse, Func};
    use crate::grid::uniform;

    /// J^d built from finite differences of φ alone.
    fn j_fd(phi: &Expr, d: f64, x: f64, p: &ParamBindings) -> f64 {
        let h = 1e-4 * x.max(1e-3);
        let f = |t: f64| phi.eval(t, p).unwrap();
        let (fm, f0, fp) = (f(x - h), f(x), f(x + h));
        let d1 = (fp - fm) / (2.0 * h);
        let d2 = (fp - 2.0 * f0 + fm) / (h * h);
        0.25 * (d1 / f0).powi(2) - 0.5 * d2 / f0 - (d - 1.0) / (2.0 * x) * d1 / f0
    }

    fn at(e: &Expr, x: f64, p: &ParamBindings) -> f64 {
        e.eval(x, p).unwrap()
    }

    #[test]
    fn constant_profile_has_zero_operator() {
        for d in [1.0, 2.0, 3.5] {
            assert_eq!(j_op(&Expr::c(1.0), d), Expr::c(0.0));
            assert_eq!(i_radial(&Expr::c(1.0), d), Expr::c(0.0));
        }
    }

    #[test]
    fn classical_hardy_profile() {
        let p = ParamBindings::from([("d", 3.0)]);
        let j = j_op(&parse("x^(2-d)").unwrap(), 3.0);
        assert!((at(&j, 2.0, &p) - 0.0625).abs() < 1e-15);
        for x in [0.1, 1.0, 7.0] {
            assert!((at(&j, x, &p) * x * x - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn exponential_profile_in_one_dimension() {
        let j = j_op(&Expr::call(Func::Exp, Expr::x()), 1.0);
        let none = ParamBindings::new();
        for x in [-2.0, 0.0, 3.0] {
            assert!((at(&j, x, &none) + 0.25).abs() < 1e-15);
            assert!((j_fd(&Expr::call(Func::Exp, Expr::x()), 1.0, x.abs() + 1.0, &none) + 0.25).abs() < 1e-6);
        }
    }

    #[test]
    fn ckn_radial_value() {
        let p = ParamBindings::from([("a", 0.5)]);
        let i = i_radial(&parse("x^(-2*a)").unwrap(), 5.0);
        assert!((at(&i, 1.0, &p) - 1.25).abs() < 1e-14);
    }

    #[test]
    fn matches_finite_difference_oracle() {
        let p = ParamBindings::from([("d", 3.0), ("alpha", 2.0)]);
        for text in ["(1+x^2)^alpha", "x*sinh(x)", "exp(-x^2/2)*x^(-1)", "log(coth(x/2))"] {
            let phi = parse(text).unwrap();
            let j = j_op(&phi, 3.0);
            for x in [0.4, 1.1, 2.5] {
                let fd = j_fd(&phi, 3.0, x, &p);
                assert!((at(&j, x, &p) - fd).abs() < 1e-5 * (1.0 + fd.abs()), "{text} at {x}");
            }
        }
    }

    #[test]
    fn product_rule_examples() {
        let grid = uniform(0.5, 3.0, 40);
        let none = ParamBindings::new();
        let pr = product_rule_residual(&parse("x^1.7").unwrap(), &parse("x^(-0.4)").unwrap(), 4.0, &grid, &none);
        assert!(pr.unwrap() <= 1e-10);
        let one = product_rule_residual(&Expr::c(1.0), &parse("cosh(x)").unwrap(), 2.0, &grid, &none);
        assert!(one.unwrap() <= 1e-14);
        let mixed = product_rule_residual(&parse("sinh(x)").unwrap(), &parse("exp(x)").unwrap(), 2.0, &grid, &none);
        assert!(mixed.unwrap() <= 1e-9);
    }

    #[test]
    fn dimension_shift_examples() {
        let grid = uniform(0.2, 5.0, 50);
        let p = ParamBindings::from([("d", 3.0), ("alpha", 2.0)]);
        let h = parse("x^(2-d)").unwrap();
        assert!(dimension_shift_residual(&h, &Expr::c(1.0), 3.0, &grid, &p).unwrap() <= 1e-10);
        assert_eq!(dimension_shift_residual(&h, &h, 3.0, &grid, &p).unwrap(), 0.0);
        let h5 = parse("(1+x^2)^((2-d)/2)").unwrap();
        let v5 = parse("(1+x^2)^alpha").unwrap();
        assert!(dimension_shift_residual(&h5, &v5, 3.0, &grid, &p).unwrap() <= 1e-9);
    }

    #[test]
    fn evaluation_errors_propagate() {
        let grid = [-1.0, 1.0];
        let r = product_rule_residual(&parse("log(x)").unwrap(), &Expr::c(2.0), 1.0, &grid, &ParamBindings::new());
        assert!(r.is_err());
    }

    proptest! {
        #[test]
        fn scale_invariance(e in safe_expr(), c in 0.01f64..100.0, d in 1.0f64..6.0) {
            let none = ParamBindings::new();
            let a = j_op(&e, d);
            let b = j_op(&(c * e.clone()), d);
            for x in [0.6, 1.4, 2.7] {
                let (va, vb) = (at(&a, x, &none), at(&b, x, &none));
                prop_assert!((va - vb).abs() <= 1e-10 * (1.0 + va.abs()));
            }
        }

        #[test]
        fn power_closed_form(pw in -4.0f64..4.0, d in 1.0f64..7.0, x in 0.05f64..20.0) {
            let j = j_op(&Expr::x().powf(pw), d);
            let expected = (-pw * pw / 4.0 + pw * (2.0 - d) / 2.0) / (x * x);
            let got = at(&j, x, &ParamBindings::new());
            prop_assert!((got - expected).abs() <= 1e-10 * expected.abs().max(1e-300) + 1e-300, "{} vs {}", got, expected);
        }

        #[test]
        fn identities_on_safe_family(a in safe_expr(), b in safe_expr(), d in 1.0f64..6.0) {
            let grid = uniform(0.5, 3.0, 16);
            let none = ParamBindings::new();
            prop_assert!(product_rule_residual(&a, &b, d, &grid, &none).unwrap() <= 1e-9);
            prop_assert!(dimension_shift_residual(&a, &b, d, &grid, &none).unwrap() <= 1e-9);
        }
    }
}
