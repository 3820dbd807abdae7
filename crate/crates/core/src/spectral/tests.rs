use super::*;
use crate::expr::parse;
use proptest::prelude::*;
use std::f64::consts::PI;

fn coeffs<'a>(v: &'a Expr, w: &'a Expr, p: &'a ParamBindings) -> Coefficients<'a> {
    Coefficients { v, w, params: p }
}

fn laplacian(a: f64, b: f64, n: usize) -> (SturmLiouvilleProblem, Expr, Expr) {
    let dom = Domain::new(a - 1.0, b + 1.0, 1.0).unwrap();
    let p = SturmLiouvilleProblem::new(dom, a, b, n, MassKind::Lebesgue, GridMap::Identity).unwrap();
    (p, Expr::c(1.0), Expr::c(0.0))
}

#[test]
fn dirichlet_laplacian_on_zero_pi() {
    let (p, v, w) = laplacian(0.0, PI, 1000);
    let b = ParamBindings::new();
    let r = min_rayleigh(&p, coeffs(&v, &w, &b)).unwrap();
    assert!((r.min_eigenvalue - 1.0).abs() < 1e-5, "{}", r.min_eigenvalue);
    assert_eq!(r.refinement.len(), 3);
    assert!(r.refinement.windows(2).all(|w| w[0].1 <= w[1].1));
}

#[test]
fn dirichlet_laplacian_first_three() {
    let (p, v, w) = laplacian(0.0, 1.0, 2000);
    let b = ParamBindings::new();
    for k in 1..=3 {
        let lam = kth_eigenvalue(&p, coeffs(&v, &w, &b), k).unwrap();
        let want = (k as f64 * PI).powi(2);
        assert!((lam - want).abs() / want < 1e-4, "k={k}: {lam}");
    }
    let lam = kth_eigenvalue(&p, coeffs(&v, &w, &b), 1).unwrap();
    assert!((lam - PI * PI).abs() < 1e-4 * PI * PI);
}

#[test]
fn eigenvector_normalization() {
    let (p, v, w) = laplacian(0.0, 1.0, 400);
    let b = ParamBindings::new();
    let r = min_rayleigh(&p, coeffs(&v, &w, &b)).unwrap();
    let pen = assemble(&p, coeffs(&v, &w, &b)).unwrap();
    let norm: f64 = r.eigenvector.iter().zip(&pen.mass).map(|(u, m)| m * u * u).sum();
    assert!((norm - 1.0).abs() < 1e-8);
    assert!(r.eigenvector.iter().all(|&u| u > 0.0));
    assert!((pen.rayleigh(&r.eigenvector) - r.min_eigenvalue).abs() < 1e-8 * r.min_eigenvalue);
    // ground mode is sin(πx) up to scale
    let i = 200;
    let ratio = r.eigenvector[i] / (PI * r.grid[i]).sin();
    let j = 50;
    assert!((r.eigenvector[j] / (PI * r.grid[j]).sin() - ratio).abs() < 1e-3 * ratio);
}

#[test]
fn small_and_invalid_problems() {
    let (p, v, w) = laplacian(0.0, 1.0, 16);
    let b = ParamBindings::new();
    assert_eq!(assemble(&p, coeffs(&v, &w, &b)).unwrap().diag.len(), 16);
    let dom = Domain::new(0.0, 1.0, 1.0).unwrap();
    assert!(SturmLiouvilleProblem::new(dom, 0.1, 0.9, 15, MassKind::Lebesgue, GridMap::Auto).is_err());
    assert!(SturmLiouvilleProblem::new(dom, 0.0, 0.9, 64, MassKind::Lebesgue, GridMap::Auto).is_err());
    assert!(SturmLiouvilleProblem::new(dom, 0.5, 0.4, 64, MassKind::Lebesgue, GridMap::Auto).is_err());
}

#[test]
fn partially_vanishing_mass() {
    let dom = Domain::new(0.0, 1.0, 1.0).unwrap();
    let p = SturmLiouvilleProblem::new(dom, 0.01, 0.99, 200, MassKind::WV, GridMap::Identity).unwrap();
    let (v, w) = (Expr::c(1.0), parse("x-0.5+abs(x-0.5)").unwrap());
    let b = ParamBindings::new();
    let pen = assemble(&p, coeffs(&v, &w, &b)).unwrap();
    assert!(pen.mass.contains(&0.0));
    let lam = pen.eigenvalue(1, EIGEN_RTOL).unwrap();
    assert!(lam.is_finite() && lam > 0.0);
    let zero = Expr::c(0.0);
    let pen = assemble(&p, coeffs(&v, &zero, &b)).unwrap();
    assert_eq!(pen.eigenvalue(1, EIGEN_RTOL), Err(SpectralError::ZeroMass));
}

#[test]
fn maps_round_trip() {
    let cases = [
        (GridMap::Log { origin: 1.0 }, [1.000001, 1.5, 700.0]),
        (GridMap::Logit { l: -1.0, r: 1.0 }, [-0.999999, 0.3, 0.999999]),
        (GridMap::Identity, [-3.0, 0.0, 2.5]),
    ];
    for (map, xs) in cases {
        for x in xs {
            let (y, _) = map.x_of_s(map.to_s(x));
            assert!((y - x).abs() < 1e-12 * x.abs().max(1.0), "{map:?} {x} {y}");
        }
    }
    let (x, jac) = GridMap::Logit { l: 0.0, r: 1.0 }.x_of_s(-30.0);
    assert!((x - (-30.0f64).exp()).abs() < 1e-25 && (jac - x).abs() < 1e-25);
}

#[test]
fn auto_map_choice() {
    let half = Domain::new(0.0, f64::INFINITY, 3.0).unwrap();
    assert_eq!(GridMap::Auto.resolve(&half, 1e-3, 1e3), GridMap::Log { origin: 0.0 });
    assert_eq!(GridMap::Auto.resolve(&half, 1.0, 2.0), GridMap::Identity);
    let unit = Domain::new(-1.0, 1.0, 1.0).unwrap();
    assert_eq!(GridMap::Auto.resolve(&unit, -0.9999, 0.9999), GridMap::Logit { l: -1.0, r: 1.0 });
}

fn classical() -> (WeightPair, Expr) {
    let dom = Domain::new(0.0, f64::INFINITY, 3.0).unwrap();
    let wp = WeightPair::new(parse("x^(-1)").unwrap(), Expr::c(1.0), dom, ParamBindings::new());
    (wp, parse("0.25/x^2").unwrap())
}

#[test]
fn classical_hardy_quotients() {
    let (wp, w) = classical();
    let tr = [Truncation::new(1e-2, 1e2, 500), Truncation::new(1e-3, 1e3, 2000)];
    let rep = verify_inequality(&wp, &w, &tr);
    assert_eq!(rep.form, QuotientForm::Weighted);
    assert_eq!(rep.verdict, Verdict::Pass, "{rep:?}");
    let vals: Vec<f64> = rep.levels.iter().map(|l| l.value.unwrap()).collect();
    // continuum value on [a, b] is 1 + 4π²/ln(b/a)²
    for (v, l) in vals.iter().zip(&rep.levels) {
        let want = 1.0 + 4.0 * PI * PI / (l.b / l.a).ln().powi(2);
        assert!((v - want).abs() < 1e-4, "{v} vs {want}");
    }
}

#[test]
fn doubled_weight_fails() {
    let (wp, w) = classical();
    let w2 = crate::expr::build::mul(Expr::c(2.0), w);
    let rep = verify_inequality(&wp, &w2, &[Truncation::new(1e-3, 1e3, 2000)]);
    assert_eq!(rep.verdict, Verdict::Fail);
    assert!(rep.levels[0].value.unwrap() < 1.0);
}

#[test]
fn zero_weight_is_vacuous() {
    let (wp, _) = classical();
    let rep = verify_inequality(&wp, &Expr::c(0.0), &[Truncation::new(1e-2, 1e2, 100)]);
    assert!(rep.vacuous);
    assert_eq!(rep.verdict, Verdict::Pass);
}

#[test]
fn gegenbauer_lebesgue_bound() {
    let dom = Domain::new(-1.0, 1.0, 1.0).unwrap();
    let p = ParamBindings::from([("alpha", 0.5)]);
    let v = parse("(1-x^2)^alpha").unwrap();
    let w = Expr::c(0.0);
    let prob = SturmLiouvilleProblem::new(dom, -1.0 + 1e-6, 1.0 - 1e-6, 1000, MassKind::Lebesgue, GridMap::Auto).unwrap();
    let r = min_rayleigh(&prob, coeffs(&v, &w, &p)).unwrap();
    assert!(r.min_eigenvalue >= 0.5, "{}", r.min_eigenvalue);
}

#[test]
fn signed_weight_uses_shifted_form() {
    // δ = 1, γ = 0.5, d = 3: W = x²/4 − 1 changes sign
    let dom = Domain::new(0.0, f64::INFINITY, 3.0).unwrap();
    let wp = WeightPair::new(
        parse("x^(-1)").unwrap(),
        parse("x^(-1)*exp(-0.5*x^2)").unwrap(),
        dom,
        ParamBindings::new(),
    );
    let w = crate::hardy::derive_weight(&wp);
    let rep = verify_inequality(&wp, &w, &[Truncation::new(1e-3, 10.0, 800), Truncation::new(1e-4, 20.0, 1600)]);
    assert_eq!(rep.form, QuotientForm::Shifted);
    assert_eq!(rep.verdict, Verdict::Pass, "{rep:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn inertia_is_monotone(s1 in -50.0f64..2000.0, s2 in -50.0f64..2000.0) {
        let (p, v, w) = laplacian(0.0, 1.0, 64);
        let b = ParamBindings::new();
        let pen = assemble(&p, coeffs(&v, &w, &b)).unwrap();
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        prop_assert!(pen.count_retry(lo).unwrap() <= pen.count_retry(hi).unwrap());
    }
}
