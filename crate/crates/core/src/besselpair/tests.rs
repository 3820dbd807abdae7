use super::*;
use crate::expr::parse;
use crate::feller::Domain;
use crate::grid::geometric;
use crate::hardy::derive_weight;

fn pair(h: &str, v: &str, d: f64, p: ParamBindings) -> WeightPair {
    let dom = Domain::new(0.0, f64::INFINITY, d).unwrap();
    WeightPair::new(parse(h).unwrap(), parse(v).unwrap(), dom, p)
}

#[test]
fn ground_state_examples() {
    let none = ParamBindings::new();
    let g = ground_state(&pair("x^(2-3)", "1", 3.0, none.clone()));
    for x in [0.01, 1.0, 7.0] {
        assert!((g.eval(x, &none).unwrap() - x.powf(-0.5)).abs() < 1e-14 * x.powf(-0.5));
    }
    let wp = pair("(1+x^2)*exp(x)", "(1+x^2)*exp(x)", 3.0, none.clone());
    assert_eq!(ground_state(&wp), Expr::c(1.0));
    let p = ParamBindings::from([("d", 4.0)]);
    let g = ground_state(&pair("x", "sinh(x)^(d-1)", 1.0, p.clone()));
    for r in [0.2f64, 1.0, 5.0] {
        let want = (r / r.sinh().powi(3)).sqrt();
        assert!((g.eval(r, &p).unwrap() - want).abs() < 1e-14 * want);
    }
}

#[test]
fn residual_examples() {
    let none = ParamBindings::new();
    let grid = geometric(0.1, 10.0, 100);
    let r = ode_residual(&parse("x^(-0.5)").unwrap(), &Expr::c(1.0), &parse("0.25/x^2").unwrap(), 3.0, &grid, &none)
        .unwrap();
    assert!(r <= 1e-10, "{r}");
    let r = ode_residual(&Expr::c(1.0), &Expr::c(1.0), &Expr::c(0.0), 3.0, &grid, &none).unwrap();
    assert_eq!(r, 0.0);
}

#[test]
fn residual_of_derived_ground_states() {
    let cases = [
        ("x^(-1)*(1+x^2)^0.5", "(1+x^2)^2", 3.0),
        ("x^(2-5)", "x^(-1)", 5.0),
        ("exp(-x)", "x^0.5", 2.0),
    ];
    let none = ParamBindings::new();
    let grid = geometric(0.2, 5.0, 64);
    for (h, v, d) in cases {
        let wp = pair(h, v, d, none.clone());
        let w = derive_weight(&wp);
        let r = ode_residual(&ground_state(&wp), &wp.v, &w, d, &grid, &none).unwrap();
        assert!(r <= 1e-8, "{h} / {v}: {r}");
    }
}

#[test]
fn residual_is_linear() {
    let none = ParamBindings::new();
    let grid = geometric(0.1, 10.0, 50);
    let (v, w) = (Expr::c(1.0), parse("0.2/x^2").unwrap());
    let u = parse("x^(-0.5)").unwrap();
    let base = ode_residual(&u, &v, &w, 3.0, &grid, &none).unwrap();
    let scaled = ode_residual(&(Expr::c(-3.0) * u), &v, &w, 3.0, &grid, &none).unwrap();
    assert!((scaled - 3.0 * base).abs() < 1e-12 * base);
}

fn classical(scale: f64) -> OdeProblem {
    let w = parse(&format!("{}/x^2", 0.25 * scale)).unwrap();
    OdeProblem::new(Expr::c(1.0), w, 3.0, 0.1, 10.0, ParamBindings::new()).seeded(1.0, 1.0, -0.5)
}

#[test]
fn shooting_reproduces_ground_state() {
    let sol = shoot(&classical(1.0)).unwrap();
    assert!(sol.positive && !sol.truncated);
    assert!(sol.samples.windows(2).all(|s| s[0].x < s[1].x));
    assert_eq!(sol.samples.first().unwrap().x, 0.1);
    assert_eq!(sol.samples.last().unwrap().x, 10.0);
    for s in &sol.samples {
        let want = s.x.powf(-0.5);
        assert!((s.u - want).abs() <= 1e-6 * want, "{s:?}");
    }
}

#[test]
fn shooting_one_decade_from_symbolic_seed() {
    let none = ParamBindings::new();
    let wp = pair("x^(-1)*(1+x^2)^0.5", "(1+x^2)^2", 3.0, none.clone());
    let w = derive_weight(&wp);
    let g = ground_state(&wp);
    let prob = OdeProblem::new(wp.v.clone(), w, 3.0, 0.5, 5.0, none.clone()).seeded_from(&g).unwrap();
    let sol = shoot(&prob).unwrap();
    assert!(sol.positive);
    for s in &sol.samples {
        let want = g.eval(s.x, &none).unwrap();
        assert!((s.u - want).abs() <= 1e-5 * want);
    }
}

#[test]
fn constant_solution() {
    let p = OdeProblem::new(Expr::c(1.0), Expr::c(0.0), 3.0, 0.1, 10.0, ParamBindings::new());
    let sol = shoot(&p).unwrap();
    assert!(sol.positive);
    assert!(sol.samples.iter().all(|s| s.u == 1.0 && s.du == 0.0));
}

#[test]
fn overcritical_potential_changes_sign() {
    let sol = shoot(&classical(4.0)).unwrap();
    assert!(!sol.positive);
    assert!(sol.min_value < 0.0);
}

#[test]
fn blow_up_is_flagged() {
    let p = OdeProblem::new(Expr::c(1.0), Expr::c(-10000.0), 1.0, 0.0, 1.0, ParamBindings::new()).seeded(0.0, 1.0, 0.0);
    let sol = shoot(&p).unwrap();
    assert!(sol.truncated);
    assert!(sol.samples.last().unwrap().x < 1.0);
}

#[test]
fn invalid_problems() {
    let p = OdeProblem::new(Expr::c(1.0), Expr::c(0.0), 3.0, 0.1, 10.0, ParamBindings::new());
    assert!(shoot(&p.clone().seeded(20.0, 1.0, 0.0)).is_err());
    assert!(shoot(&p.clone().with_step(0.0)).is_err());
    let neg = OdeProblem::new(Expr::c(-1.0), Expr::c(0.0), 3.0, 0.1, 10.0, ParamBindings::new());
    assert!(shoot(&neg).is_err());
}
