use proptest::prelude::*;

use super::*;

fn central(e: &Expr, x: f64, p: &ParamBindings, h: f64) -> f64 {
    (e.eval(x + h, p).unwrap() - e.eval(x - h, p).unwrap()) / (2.0 * h)
}

fn ev(text: &str, x: f64) -> f64 {
    parse(text).unwrap().eval(x, &ParamBindings::new()).unwrap()
}

#[test]
fn parses_power_with_parameter_exponent() {
    let e = parse("x^(2-d)").unwrap();
    assert_eq!(e, Expr::x().powe(Expr::c(2.0) - Expr::param("d")));
}

#[test]
fn parses_function_power() {
    let e = parse_with_var("sinh(r)^(d-1)", "r").unwrap();
    assert_eq!(e, Expr::call(Func::Sinh, Expr::x()).powe(Expr::param("d") - Expr::c(1.0)));
}

#[test]
fn dangling_caret_reports_offset() {
    let err = parse("x^").unwrap_err();
    assert!(matches!(err, ParseError::Syntax { offset: 2, .. }), "{err:?}");
}

#[test]
fn unknown_function_rejected() {
    let err = parse("1 + gamma(x)").unwrap_err();
    assert_eq!(err, ParseError::UnknownFunction { offset: 4, name: "gamma".into() });
}

#[test]
fn malformed_inputs_located() {
    assert_eq!(parse("(x+1").unwrap_err().offset(), 4);
    assert_eq!(parse("x + * 2").unwrap_err().offset(), 4);
    assert_eq!(parse("2 x").unwrap_err().offset(), 2);
    assert_eq!(parse("x $ 1").unwrap_err().offset(), 2);
    assert!(parse("sinh + 1").is_err());
    assert!(parse("").is_err());
}

#[test]
fn precedence_and_unary_minus() {
    assert_eq!(ev("-x^2", 3.0), -9.0);
    assert_eq!(ev("2^-1", 0.0), 0.5);
    assert_eq!(ev("2^3^2", 0.0), 512.0);
    assert_eq!(ev("1-2-3", 0.0), -4.0);
    assert_eq!(ev("8/2/2", 0.0), 2.0);
    assert_eq!(ev("1.5e1 + .5", 0.0), 15.5);
}

#[test]
fn eval_examples() {
    let p = ParamBindings::from([("d", 3.0)]);
    assert_eq!(parse("x^(2-d)").unwrap().eval(2.0, &p).unwrap(), 0.5);
    assert_eq!(ev("log(x)", 1.0), 0.0);
    let err = parse("log(x)").unwrap().eval(-1.0, &ParamBindings::new()).unwrap_err();
    assert!(matches!(err, EvalError::Domain { op: "log", .. }));
}

#[test]
fn eval_errors() {
    let none = ParamBindings::new();
    assert_eq!(parse("x^a").unwrap().eval(1.0, &none), Err(EvalError::Unbound("a".into())));
    assert!(parse("x^(-1)").unwrap().eval(0.0, &none).is_err());
    assert!(parse("coth(x)").unwrap().eval(0.0, &none).is_err());
    assert!(parse("sqrt(x)").unwrap().eval(-1.0, &none).is_err());
}

#[test]
fn log_coth_is_stable_for_large_arguments() {
    let e = parse("log(coth(x))").unwrap();
    let v = e.eval(25.0, &ParamBindings::new()).unwrap();
    let expected = 2.0 * (-50.0f64).exp();
    assert!((v - expected).abs() <= 1e-12 * expected);
    let small = e.eval(1e-3, &ParamBindings::new()).unwrap();
    assert!((small - (1.0 / (1e-3f64).tanh()).ln()).abs() < 1e-12);
}

#[test]
fn derivative_examples() {
    let none = ParamBindings::new();
    assert_eq!(parse("x^2").unwrap().differentiate().eval(3.0, &none).unwrap(), 6.0);
    assert_eq!(parse("sinh(x)").unwrap().differentiate().eval(0.0, &none).unwrap(), 1.0);
    let e = parse("log(coth(x/2))").unwrap();
    let d = e.differentiate().eval(1.0, &none).unwrap();
    // exact value -1/sinh(1)
    assert!((d + 1.0 / 1f64.sinh()).abs() < 1e-14);
    assert!((d - central(&e, 1.0, &none, 1e-5)).abs() < 1e-8);
}

#[test]
fn derivative_of_every_function_matches_central_difference() {
    let none = ParamBindings::new();
    for text in [
        "log(x)", "exp(x)", "sqrt(x)", "abs(x-3)", "sinh(x)", "cosh(x)", "tanh(x)", "coth(x)",
        "x^x", "2^x", "x^2.5", "(1+x^2)^(-1.5)", "x/(1+x)", "-x*exp(-x)",
    ] {
        let e = parse(text).unwrap();
        let d = e.differentiate();
        for &x in &[0.7, 1.3, 2.9] {
            let fd = central(&e, x, &none, 1e-5);
            let exact = d.eval(x, &none).unwrap();
            assert!((exact - fd).abs() <= 1e-7 * (1.0 + fd.abs()), "{text} at {x}: {exact} vs {fd}");
        }
    }
}

#[test]
fn simplify_examples() {
    assert_eq!(simplify(&((Expr::x() * 1.0) + 0.0)), Expr::x());
    assert_eq!(simplify(&(Expr::c(2.0) + Expr::c(3.0))), Expr::c(5.0));
    assert_eq!(simplify(&Expr::x().powf(0.0)), Expr::c(1.0));
    assert_eq!(simplify(&Expr::x().powf(1.0)), Expr::x());
    assert_eq!(simplify(&(Expr::x() * 0.0)), Expr::c(0.0));
}

#[test]
fn bind_substitutes_and_folds() {
    let e = parse("x^(2-d)").unwrap().bind(&ParamBindings::from([("d", 3.0)]));
    assert_eq!(e, Expr::x().powf(-1.0));
}

#[test]
fn differentiation_is_closed_under_rendering() {
    let e = parse("sinh(x)^(d-1)*log(coth(x/2))/sqrt(1+x^2)").unwrap();
    let d2 = e.differentiate().differentiate();
    let back = parse(&d2.to_string()).unwrap();
    let p = ParamBindings::from([("d", 4.0)]);
    for &x in &[0.3, 1.0, 4.0] {
        assert_eq!(back.eval(x, &p).unwrap().to_bits(), d2.eval(x, &p).unwrap().to_bits());
    }
}

/// Random members of the safe family: powers, (1+x^2)^q, exponentials,
/// sinh^k, log, and products/quotients of those.
fn safe_leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-3.0f64..3.0).prop_map(|p| Expr::x().powf(p)),
        (-2.0f64..2.0).prop_map(|q| (1.0 + Expr::x().powf(2.0)).powf(q)),
        (-1.0f64..1.0).prop_map(|s| Expr::call(Func::Exp, s * Expr::x())),
        (1u32..4).prop_map(|k| Expr::call(Func::Sinh, Expr::x()).powf(k as f64)),
        Just(2.0 + Expr::call(Func::Log, Expr::x())),
    ]
}

pub(crate) fn safe_expr() -> impl Strategy<Value = Expr> {
    (safe_leaf(), safe_leaf(), 0u8..3).prop_map(|(a, b, op)| match op {
        0 => a,
        1 => a * b,
        _ => a / b,
    })
}

proptest! {
    #[test]
    fn derivative_agrees_with_central_differences(e in safe_expr()) {
        let none = ParamBindings::new();
        let d = e.differentiate();
        for i in 0..32 {
            let x = 0.5 + 2.5 * (i as f64 + 0.5) / 32.0;
            let h = 1e-4 * x;
            let fd = central(&e, x, &none, h);
            let exact = d.eval(x, &none).unwrap();
            let scale = exact.abs().max(e.eval(x, &none).unwrap().abs() / x).max(1e-300);
            prop_assert!((exact - fd).abs() <= 1e-6 * scale, "{} at {}: {} vs {}", e, x, exact, fd);
        }
    }

    #[test]
    fn simplify_preserves_values(e in safe_expr()) {
        let none = ParamBindings::new();
        let raw = e.differentiate();
        let s = simplify(&raw);
        // golden-ratio sequence over [0.5, 3.5]
        let phi = 0.618_033_988_749_895_f64;
        for i in 0..64 {
            let x = 0.5 + 3.0 * ((i as f64 * phi) % 1.0);
            let a = raw.eval(x, &none).unwrap();
            let b = s.eval(x, &none).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn render_round_trips(e in safe_expr()) {
        let d = e.differentiate();
        for tree in [e, d] {
            let text = tree.to_string();
            let parsed = parse(&text).unwrap();
            prop_assert_eq!(parse(&parsed.to_string()).unwrap(), parsed);
        }
    }

    #[test]
    fn eval_is_deterministic(e in safe_expr(), x in 0.5f64..3.0) {
        let none = ParamBindings::new();
        prop_assert_eq!(e.eval(x, &none).unwrap().to_bits(), e.eval(x, &none).unwrap().to_bits());
    }
}
