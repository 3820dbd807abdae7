//! Discrete Rayleigh quotients for radial weighted forms.
//!
//! The quotient ∫u'² p / ∫u² m with p = V t^{d−1} is discretized by finite
//! differences on a truncated interval with Dirichlet ends, optionally after a
//! change of variable x = φ(s) that clusters nodes near singular endpoints.
//! The smallest generalized eigenvalue of the tridiagonal pencil is found by
//! bisection on Sturm inertia counts.

use serde::Serialize;
use thiserror::Error;

use crate::expr::{EvalError, Expr, ParamBindings};
use crate::feller::Domain;
use crate::hardy::WeightPair;
use crate::par;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SpectralError {
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("non-finite {what} at x = {x}")]
    NonFinite { what: &'static str, x: f64 },
    #[error("mass vanishes identically")]
    ZeroMass,
    #[error("factorization broke down near sigma = {sigma}")]
    Breakdown { sigma: f64 },
    #[error("no eigenvalue bracket found")]
    NoBracket,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MassKind {
    /// t^{d−1}
    Lebesgue,
    /// V t^{d−1}
    V,
    /// W V t^{d−1}
    WV,
}

/// Change of variable x = φ(s) used for the uniform grid in s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum GridMap {
    Identity,
    /// x = origin + e^s
    Log { origin: f64 },
    /// x = l + (r − l)/(1 + e^{−s})
    Logit { l: f64, r: f64 },
    /// Pick from the domain and the truncation.
    Auto,
}

impl GridMap {
    fn resolve(self, dom: &Domain, a: f64, b: f64) -> GridMap {
        if self != GridMap::Auto {
            return self;
        }
        let (l, r) = (dom.l, dom.r);
        if l.is_finite() && r.is_finite() {
            let gap = (a - l).min(r - b) / (r - l);
            if gap < 1e-2 {
                return GridMap::Logit { l, r };
            }
        } else if l.is_finite() && (b - l) / (a - l) >= 1e4 {
            return GridMap::Log { origin: l };
        }
        GridMap::Identity
    }

    fn to_s(self, x: f64) -> f64 {
        match self {
            GridMap::Log { origin } => (x - origin).ln(),
            GridMap::Logit { l, r } => ((x - l) / (r - x)).ln(),
            _ => x,
        }
    }

    /// (x, dx/ds)
    fn x_of_s(self, s: f64) -> (f64, f64) {
        match self {
            GridMap::Log { origin } => {
                let e = s.exp();
                (origin + e, e)
            }
            GridMap::Logit { l, r } => {
                // σ and 1 − σ computed separately so neither end loses digits
                let (sig, co) = if s >= 0.0 {
                    let e = (-s).exp();
                    (1.0 / (1.0 + e), e / (1.0 + e))
                } else {
                    let e = s.exp();
                    (e / (1.0 + e), 1.0 / (1.0 + e))
                };
                let x = if sig <= 0.5 { l + (r - l) * sig } else { r - (r - l) * co };
                (x, (r - l) * sig * co)
            }
            _ => (s, 1.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SturmLiouvilleProblem {
    pub dom: Domain,
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub mass: MassKind,
    pub map: GridMap,
}

impl SturmLiouvilleProblem {
    pub fn new(dom: Domain, a: f64, b: f64, n: usize, mass: MassKind, map: GridMap) -> Result<Self, SpectralError> {
        if !(a < b && a > dom.l && b < dom.r && a.is_finite() && b.is_finite()) {
            return Err(SpectralError::Invalid(format!("[{a}, {b}] is not strictly inside the domain")));
        }
        if n < 16 {
            return Err(SpectralError::Invalid(format!("grid size {n} below 16")));
        }
        let map = map.resolve(&dom, a, b);
        Ok(Self { dom, a, b, n, mass, map })
    }

    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..self.clone() }
    }
}

/// Symmetric tridiagonal stiffness with diagonal mass.
#[derive(Clone, Debug, PartialEq)]
pub struct Pencil {
    /// Interior nodes in the original variable.
    pub grid: Vec<f64>,
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    pub mass: Vec<f64>,
}

/// Expressions and bindings entering the quotient.
#[derive(Clone, Copy, Debug)]
pub struct Coefficients<'a> {
    pub v: &'a Expr,
    pub w: &'a Expr,
    pub params: &'a ParamBindings,
}

fn checked(what: &'static str, x: f64, v: f64) -> Result<f64, SpectralError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(SpectralError::NonFinite { what, x })
    }
}

pub fn assemble(problem: &SturmLiouvilleProblem, c: Coefficients<'_>) -> Result<Pencil, SpectralError> {
    let n = problem.n;
    let map = problem.map;
    let (sa, sb) = (map.to_s(problem.a), map.to_s(problem.b));
    let step = (sb - sa) / (n + 1) as f64;
    let dm1 = problem.dom.d - 1.0;
    let radial = |x: f64| if dm1 == 0.0 { 1.0 } else { x.abs().powf(dm1) };

    let stiff = |s: f64| -> Result<f64, SpectralError> {
        let (x, jac) = map.x_of_s(s);
        let p = c.v.eval(x, c.params)? * radial(x);
        let v = checked("stiffness", x, p / jac)?;
        if v <= 0.0 {
            return Err(SpectralError::Invalid(format!("stiffness weight not positive at x = {x}")));
        }
        Ok(v)
    };
    let node_mass = |s: f64| -> Result<(f64, f64), SpectralError> {
        let (x, jac) = map.x_of_s(s);
        let base = radial(x) * jac * step;
        let m = match problem.mass {
            MassKind::Lebesgue => base,
            MassKind::V => c.v.eval(x, c.params)? * base,
            MassKind::WV => c.w.eval(x, c.params)? * c.v.eval(x, c.params)? * base,
        };
        Ok((x, checked("mass", x, m)?))
    };

    let mids: Vec<f64> = (0..=n).map(|i| sa + (i as f64 + 0.5) * step).collect();
    let p_mid = par::map(&mids, |&s| stiff(s)).into_iter().collect::<Result<Vec<_>, _>>()?;
    let nodes: Vec<f64> = (1..=n).map(|i| sa + i as f64 * step).collect();
    let masses = par::map(&nodes, |&s| node_mass(s)).into_iter().collect::<Result<Vec<_>, _>>()?;

    let diag = (0..n).map(|i| (p_mid[i] + p_mid[i + 1]) / step).collect();
    let off = (0..n - 1).map(|i| -p_mid[i + 1] / step).collect();
    let (grid, mass) = masses.into_iter().unzip();
    Ok(Pencil { grid, diag, off, mass })
}

impl Pencil {
    /// Number of generalized eigenvalues below sigma (Sylvester inertia of K − σM).
    pub fn count_below(&self, sigma: f64) -> Result<usize, SpectralError> {
        let mut count = 0;
        let mut q = 0.0;
        for i in 0..self.diag.len() {
            let a = self.diag[i] - sigma * self.mass[i];
            q = if i == 0 { a } else { a - self.off[i - 1] * self.off[i - 1] / q };
            if q == 0.0 || !q.is_finite() {
                return Err(SpectralError::Breakdown { sigma });
            }
            if q < 0.0 {
                count += 1;
            }
        }
        Ok(count)
    }

    fn count_retry(&self, sigma: f64) -> Result<usize, SpectralError> {
        let mut s = sigma;
        for attempt in 1..=4 {
            match self.count_below(s) {
                Err(SpectralError::Breakdown { .. }) => {
                    s = sigma + 1e-14 * sigma.abs().max(1e-300) * attempt as f64;
                }
                other => return other,
            }
        }
        Err(SpectralError::Breakdown { sigma })
    }

    /// k-th smallest generalized eigenvalue (k ≥ 1) to relative tolerance `rtol`.
    pub fn eigenvalue(&self, k: usize, rtol: f64) -> Result<f64, SpectralError> {
        if self.mass.iter().all(|&m| m == 0.0) {
            return Err(SpectralError::ZeroMass);
        }
        let mut lo = 0.0;
        if self.count_retry(lo)? >= k {
            lo = -1.0;
            while self.count_retry(lo)? >= k {
                lo *= 2.0;
                if !lo.is_finite() {
                    return Err(SpectralError::NoBracket);
                }
            }
        }
        let mut hi = lo.abs().max(1.0);
        while self.count_retry(hi)? < k {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(SpectralError::NoBracket);
            }
        }
        let floor = 1e-300;
        for _ in 0..400 {
            if hi - lo <= rtol * lo.abs().max(hi.abs()) + floor {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.count_retry(mid)? >= k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Solve (K − σM) y = rhs by the Thomas algorithm.
    fn solve_shifted(&self, sigma: f64, rhs: &[f64]) -> Option<Vec<f64>> {
        let n = self.diag.len();
        let mut c = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut piv = self.diag[0] - sigma * self.mass[0];
        if piv == 0.0 {
            return None;
        }
        y[0] = rhs[0] / piv;
        for i in 1..n {
            c[i - 1] = self.off[i - 1] / piv;
            piv = self.diag[i] - sigma * self.mass[i] - self.off[i - 1] * c[i - 1];
            if piv == 0.0 || !piv.is_finite() {
                return None;
            }
            y[i] = (rhs[i] - self.off[i - 1] * y[i - 1]) / piv;
        }
        for i in (0..n - 1).rev() {
            y[i] -= c[i] * y[i + 1];
        }
        Some(y)
    }

    fn mass_norm(&self, u: &[f64]) -> f64 {
        u.iter().zip(&self.mass).map(|(x, m)| m * x * x).sum::<f64>().sqrt()
    }

    /// Eigenvector for `lambda` by inverse iteration, normalized so that uᵀMu = 1
    /// and its largest-magnitude entry is positive.
    pub fn eigenvector(&self, lambda: f64) -> Result<Vec<f64>, SpectralError> {
        let n = self.diag.len();
        let mut u = vec![1.0; n];
        let mut shift = 1e-8 * lambda.abs().max(1e-12);
        for _ in 0..6 {
            let sigma = lambda - shift;
            let mut ok = true;
            for _ in 0..4 {
                let rhs: Vec<f64> = u.iter().zip(&self.mass).map(|(x, m)| x * m).collect();
                match self.solve_shifted(sigma, &rhs) {
                    Some(y) => {
                        let norm = self.mass_norm(&y);
                        if !(norm > 0.0 && norm.is_finite()) {
                            ok = false;
                            break;
                        }
                        u = y.into_iter().map(|x| x / norm).collect();
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                let imax = (0..n).max_by(|&i, &j| u[i].abs().total_cmp(&u[j].abs())).unwrap_or(0);
                if u[imax] < 0.0 {
                    u.iter_mut().for_each(|x| *x = -*x);
                }
                return Ok(u);
            }
            shift *= 10.0;
        }
        Err(SpectralError::Breakdown { sigma: lambda - shift })
    }

    /// Rayleigh quotient uᵀKu / uᵀMu.
    pub fn rayleigh(&self, u: &[f64]) -> f64 {
        let n = u.len();
        let mut num = 0.0;
        for i in 0..n {
            num += self.diag[i] * u[i] * u[i];
            if i + 1 < n {
                num += 2.0 * self.off[i] * u[i] * u[i + 1];
            }
        }
        num / self.mass_norm(u).powi(2)
    }
}

pub const EIGEN_RTOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralResult {
    pub min_eigenvalue: f64,
    pub eigenvector: Vec<f64>,
    pub grid: Vec<f64>,
    /// (n, smallest eigenvalue) at coarser grids and the requested one.
    pub refinement: Vec<(usize, f64)>,
}

/// k-th smallest eigenvalue of the discretized problem.
pub fn kth_eigenvalue(problem: &SturmLiouvilleProblem, c: Coefficients<'_>, k: usize) -> Result<f64, SpectralError> {
    assemble(problem, c)?.eigenvalue(k, EIGEN_RTOL)
}

pub fn min_rayleigh(problem: &SturmLiouvilleProblem, c: Coefficients<'_>) -> Result<SpectralResult, SpectralError> {
    let mut sizes: Vec<usize> = [problem.n / 4, problem.n / 2].into_iter().filter(|&m| m >= 16).collect();
    sizes.dedup();
    let coarse = par::map(&sizes, |&m| kth_eigenvalue(&problem.with_n(m), c, 1));
    let pencil = assemble(problem, c)?;
    let lambda = pencil.eigenvalue(1, EIGEN_RTOL)?;
    let eigenvector = pencil.eigenvector(lambda)?;
    let mut refinement = Vec::with_capacity(sizes.len() + 1);
    for (m, v) in sizes.into_iter().zip(coarse) {
        refinement.push((m, v?));
    }
    refinement.push((problem.n, lambda));
    Ok(SpectralResult { min_eigenvalue: lambda, eigenvector, grid: pencil.grid, refinement })
}

/// One truncated interval with its grid size and map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Truncation {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub map: GridMap,
}

impl Truncation {
    pub fn new(a: f64, b: f64, n: usize) -> Self {
        Self { a, b, n, map: GridMap::Auto }
    }

    pub fn mapped(self, map: GridMap) -> Self {
        Self { map, ..self }
    }
}

/// Two nested truncations of a bounded interval, 1e-3 and 1e-4 of the span from each end.
pub fn unit_truncations(l: f64, r: f64) -> Vec<Truncation> {
    let s = r - l;
    vec![Truncation::new(l + 1e-3 * s, r - 1e-3 * s, 1000), Truncation::new(l + 1e-4 * s, r - 1e-4 * s, 2000)]
}

/// Two nested truncations of (l, ∞), log-spaced from l.
pub fn ray_truncations(l: f64, scale: f64) -> Vec<Truncation> {
    let map = GridMap::Log { origin: l };
    vec![
        Truncation::new(l + 1e-2 * scale, l + 1e2 * scale, 1000).mapped(map),
        Truncation::new(l + 1e-3 * scale, l + 1e3 * scale, 2000).mapped(map),
    ]
}

/// Truncations used when the caller gives none.
pub fn default_truncations(dom: &Domain) -> Vec<Truncation> {
    match (dom.l.is_finite(), dom.r.is_finite()) {
        (true, true) => unit_truncations(dom.l, dom.r),
        (true, false) => ray_truncations(dom.l, dom.l.abs().max(1.0)),
        (false, true) => {
            let s = dom.r.abs().max(1.0);
            vec![
                Truncation::new(dom.r - 1e2 * s, dom.r - 1e-2 * s, 1000),
                Truncation::new(dom.r - 1e3 * s, dom.r - 1e-3 * s, 2000),
            ]
        }
        (false, false) => vec![Truncation::new(-1e2, 1e2, 1000), Truncation::new(-1e3, 1e3, 2000)],
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum QuotientForm {
    /// min ∫u'²V t^{d−1} / ∫u²WV t^{d−1}; the inequality holds iff ≥ 1.
    Weighted,
    /// min of (∫u'²V t^{d−1} − ∫u²WV t^{d−1}) / ∫u²V t^{d−1}; holds iff ≥ 0.
    /// Used when W changes sign.
    Shifted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Level {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub map: GridMap,
    pub value: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub form: QuotientForm,
    pub levels: Vec<Level>,
    pub verdict: Verdict,
    pub vacuous: bool,
    pub notes: Vec<String>,
}

pub const QUOTIENT_SLACK: f64 = 1e-6;
pub const MONOTONE_SLACK: f64 = 1e-8;

fn shifted_min(problem: &SturmLiouvilleProblem, c: Coefficients<'_>) -> Result<f64, SpectralError> {
    let potential = assemble(&SturmLiouvilleProblem { mass: MassKind::WV, ..problem.clone() }, c)?;
    let mut pencil = assemble(&SturmLiouvilleProblem { mass: MassKind::V, ..problem.clone() }, c)?;
    for (d, q) in pencil.diag.iter_mut().zip(&potential.mass) {
        *d -= q;
    }
    pencil.eigenvalue(1, EIGEN_RTOL)
}

/// Check ∫u²WV t^{d−1} ≤ ∫u'²V t^{d−1} on a sequence of growing truncations.
pub fn verify_inequality(wp: &WeightPair, w: &Expr, truncations: &[Truncation]) -> VerificationReport {
    let c = Coefficients { v: &wp.v, w, params: &wp.params };
    if w.is_zero() {
        return VerificationReport {
            form: QuotientForm::Weighted,
            levels: Vec::new(),
            verdict: Verdict::Pass,
            vacuous: true,
            notes: vec!["W vanishes identically; quotient is +inf".into()],
        };
    }
    let signed = truncations.iter().any(|t| {
        SturmLiouvilleProblem::new(wp.dom, t.a, t.b, t.n, MassKind::WV, t.map)
            .and_then(|p| assemble(&p, c))
            .map(|pen| pen.mass.iter().any(|&m| m < 0.0))
            .unwrap_or(false)
    });
    let form = if signed { QuotientForm::Shifted } else { QuotientForm::Weighted };

    let levels: Vec<Level> = par::map(truncations, |t| {
        let res = SturmLiouvilleProblem::new(wp.dom, t.a, t.b, t.n, MassKind::WV, t.map).and_then(|p| {
            let v = match form {
                QuotientForm::Weighted => assemble(&p, c)?.eigenvalue(1, EIGEN_RTOL)?,
                QuotientForm::Shifted => shifted_min(&p, c)?,
            };
            Ok((p.map, v))
        });
        match res {
            Ok((map, v)) => Level { a: t.a, b: t.b, n: t.n, map, value: Some(v), error: None },
            Err(e) => Level { a: t.a, b: t.b, n: t.n, map: t.map, value: None, error: Some(e.to_string()) },
        }
    });

    let mut notes = Vec::new();
    let values: Vec<f64> = levels.iter().filter_map(|l| l.value).collect();
    let verdict = if values.len() != levels.len() {
        if values.is_empty() && levels.iter().all(|l| l.error.as_deref() == Some("mass vanishes identically")) {
            notes.push("W vanishes on every truncation".into());
            return VerificationReport { form, levels, verdict: Verdict::Pass, vacuous: true, notes };
        }
        notes.push("some truncations could not be solved".into());
        Verdict::Inconclusive
    } else {
        let target = match form {
            QuotientForm::Weighted => 1.0 - QUOTIENT_SLACK,
            QuotientForm::Shifted => -QUOTIENT_SLACK,
        };
        let low = values.iter().position(|&v| v < target);
        let rise = values.windows(2).position(|p| p[1] > p[0] + MONOTONE_SLACK * p[0].abs().max(1.0));
        if let Some(i) = low {
            notes.push(format!("level {i} value {} below {target}", values[i]));
        }
        if let Some(i) = rise {
            notes.push(format!("level {} increased over level {i}", i + 1));
        }
        if low.is_none() && rise.is_none() { Verdict::Pass } else { Verdict::Fail }
    };
    VerificationReport { form, levels, verdict, vacuous: false, notes }
}

#[cfg(test)]
mod tests;
