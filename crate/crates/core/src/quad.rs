//! Adaptive composite Simpson quadrature with Richardson extrapolation.

/// Integration failed because the integrand was not finite somewhere in the
/// interval. Carries the offending abscissa.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonFinite {
    pub at: f64,
}

const MAX_DEPTH: u32 = 50;
const MAX_EVALS: usize = 2_000_000;

/// ∫_a^b f with relative tolerance `tol`. `f` returns `None` for points where
/// the integrand is undefined.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64, NonFinite>
where
    F: Fn(f64) -> Option<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    let eval = |x: f64| match f(x) {
        Some(v) if v.is_finite() => Ok(v),
        _ => Err(NonFinite { at: x }),
    };
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (eval(a)?, eval(m)?, eval(b)?);
    // coarse 5-point estimate sets the absolute scale of the tolerance
    let (l, r) = (0.5 * (a + m), 0.5 * (m + b));
    let (fl, fr) = (eval(l)?, eval(r)?);
    let coarse = (b - a) / 12.0 * (fa + 4.0 * fl + 2.0 * fm + 4.0 * fr + fb);
    let abs_scale = coarse.abs().max(((b - a) * (fa.abs() + fm.abs() + fb.abs()) / 3.0).abs());
    let eps = (tol * abs_scale).max(f64::MIN_POSITIVE);

    struct Seg {
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    }
    let simpson = |a: f64, b: f64, fa: f64, fm: f64, fb: f64| (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut stack = vec![Seg { a, b, fa, fm, fb, whole: simpson(a, b, fa, fm, fb), eps, depth: 0 }];
    let mut total = 0.0;
    let mut comp = 0.0; // Kahan compensation
    let mut evals = 5usize;
    while let Some(s) = stack.pop() {
        let m = 0.5 * (s.a + s.b);
        let lm = 0.5 * (s.a + m);
        let rm = 0.5 * (m + s.b);
        let (flm, frm) = (eval(lm)?, eval(rm)?);
        evals += 2;
        let left = simpson(s.a, m, s.fa, flm, s.fm);
        let right = simpson(m, s.b, s.fm, frm, s.fb);
        let delta = left + right - s.whole;
        if s.depth >= MAX_DEPTH || evals >= MAX_EVALS || delta.abs() <= 15.0 * s.eps {
            let piece = left + right + delta / 15.0;
            let y = piece - comp;
            let t = total + y;
            comp = (t - total) - y;
            total = t;
        } else {
            let half = 0.5 * s.eps;
            stack.push(Seg { a: m, b: s.b, fa: s.fm, fm: frm, fb: s.fb, whole: right, eps: half, depth: s.depth + 1 });
            stack.push(Seg { a: s.a, b: m, fa: s.fa, fm: flm, fb: s.fm, whole: left, eps: half, depth: s.depth + 1 });
        }
    }
    if total.is_finite() {
        Ok(total)
    } else {
        Err(NonFinite { at: 0.5 * (a + b) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = adaptive_simpson(|x| Some(x * x * x - 2.0 * x), 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 0.0).abs() < 1e-13);
    }

    #[test]
    fn reciprocal_over_shell() {
        let v = adaptive_simpson(|x| Some(1.0 / x), 1e-6, 4e-6, 1e-10).unwrap();
        assert!((v - 4f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn steep_exponential() {
        let v = adaptive_simpson(|x: f64| Some(x.exp()), 16.0, 64.0, 1e-10).unwrap();
        let exact = 64f64.exp() - 16f64.exp();
        assert!(((v - exact) / exact).abs() < 1e-9);
    }

    #[test]
    fn reports_non_finite_point() {
        let r = adaptive_simpson(|x: f64| if x > 0.5 { None } else { Some(1.0) }, 0.0, 1.0, 1e-8);
        assert!(r.is_err());
    }
}
