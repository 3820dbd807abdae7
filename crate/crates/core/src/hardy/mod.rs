//! Hardy weights from weight pairs (h, V).
//!
//! For positive radial h and V the weight W = J^d(h) − J^d(V) satisfies
//! ∫ u² W V t^{d−1} ≤ ∫ u'² V t^{d−1} whenever the h-form is recurrent and
//! W ≥ 0. The weight is critical in that case and optimal when ∫ h W t^{d−1}
//! diverges.

use serde::Serialize;
use thiserror::Error;

use crate::calculus::j_op;
use crate::expr::build::{div, mul, sub};
use crate::expr::{EvalError, Expr, ParamBindings};
use crate::feller::{
    classify_endpoint_integral, recurrence_test, ConfigError, Domain, Endpoint, FellerConfig, IntegralTag,
    IntegralVerdict, Recurrence, RecurrenceVerdict, ShellEvidence,
};
use crate::grid::{refine_min, scan_grid, GridPolicy};
use crate::par;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum HardyError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{which} is not positive at x = {x} (value {value})")]
    NonPositive { which: &'static str, x: f64, value: f64 },
}

/// Candidate pair of radial weights on a domain, with parameter values.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightPair {
    pub h: Expr,
    #[serde(rename = "V")]
    pub v: Expr,
    pub dom: Domain,
    pub params: ParamBindings,
}

impl WeightPair {
    pub fn new(h: Expr, v: Expr, dom: Domain, params: ParamBindings) -> Self {
        Self { h, v, dom, params }
    }

    /// Check h > 0 and V > 0 on the scan grid.
    pub fn validate(&self, n: usize, policy: &GridPolicy) -> Result<(), HardyError> {
        let grid = scan_grid(&self.dom, n, policy);
        for (which, e) in [("h", &self.h), ("V", &self.v)] {
            for &x in &grid {
                let value = e.eval(x, &self.params)?;
                if value <= 0.0 {
                    return Err(HardyError::NonPositive { which, x, value });
                }
            }
        }
        Ok(())
    }

    /// The pair with h replaced by V, whose recurrence rules out any Hardy weight.
    fn v_form(&self) -> Expr {
        self.v.clone()
    }
}

/// W = J^d(h) − J^d(V).
pub fn derive_weight(wp: &WeightPair) -> Expr {
    sub(j_op(&wp.h, wp.dom.d), j_op(&wp.v, wp.dom.d)).simplify()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict")]
pub enum Positivity {
    Nonnegative { min_margin: f64, at: f64 },
    Negative { witness: f64, value: f64 },
    Indeterminate { at: f64, error: String },
}

impl Positivity {
    pub fn is_nonnegative(&self) -> bool {
        matches!(self, Positivity::Nonnegative { .. })
    }
}

/// Sample W on the scan grid; report the smallest value or the first negative one.
pub fn positivity_scan(w: &Expr, p: &ParamBindings, dom: &Domain, n: usize, policy: &GridPolicy) -> Positivity {
    let grid = scan_grid(dom, n.max(64), policy);
    let vals = par::map(&grid, |&x| w.eval(x, p));
    let mut scale = 0.0f64;
    for v in vals.iter().flatten() {
        scale = scale.max(v.abs());
    }
    let floor = -1e-12 * scale;
    let mut best = (f64::NAN, f64::INFINITY);
    for (&x, v) in grid.iter().zip(vals) {
        match v {
            Err(e) => return Positivity::Indeterminate { at: x, error: e.to_string() },
            Ok(v) if v < floor => return Positivity::Negative { witness: x, value: v },
            Ok(v) if v < best.1 => best = (x, v),
            Ok(_) => {}
        }
    }
    Positivity::Nonnegative { min_margin: best.1, at: best.0 }
}

/// Endpoint test of ∫ h W t^{d−1}: divergent at either end makes W optimal.
pub fn optimality_test(wp: &WeightPair, w: &Expr, cfg: &FellerConfig) -> Result<IntegralVerdict, ConfigError> {
    let integrand = mul(mul(wp.h.clone(), w.clone()), Expr::x().powf(wp.dom.d - 1.0)).simplify();
    let (left, right) = par::join(
        || classify_endpoint_integral(&integrand, &wp.params, Endpoint::Left, &wp.dom, cfg),
        || classify_endpoint_integral(&integrand, &wp.params, Endpoint::Right, &wp.dom, cfg),
    );
    let (left, right) = (left?, right?);
    let tag = match (&left.tag, &right.tag) {
        (IntegralTag::Divergent { rate }, _) | (_, IntegralTag::Divergent { rate }) => {
            IntegralTag::Divergent { rate: *rate }
        }
        (IntegralTag::Convergent { value: a }, IntegralTag::Convergent { value: b }) => {
            IntegralTag::Convergent { value: a + b }
        }
        _ => IntegralTag::Indeterminate { reason: "endpoint integral indeterminate".into() },
    };
    let evidence: Vec<ShellEvidence> = left.evidence.into_iter().chain(right.evidence).collect();
    Ok(IntegralVerdict { tag, evidence })
}

/// B = ½ (h'/h · V − V'), the boundary density of the inequality on a
/// bounded radial domain (derivatives along the outward radial direction).
pub fn boundary_density(wp: &WeightPair) -> Expr {
    let hv = mul(div(wp.h.differentiate(), wp.h.clone()), wp.v.clone());
    mul(Expr::c(0.5), sub(hv, wp.v.differentiate())).simplify()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Infimum {
    pub value: f64,
    pub at: f64,
}

/// Grid infimum of `e`, refined by golden section around the best grid point.
pub fn weighted_infimum(
    e: &Expr,
    p: &ParamBindings,
    dom: &Domain,
    n: usize,
    policy: &GridPolicy,
) -> Result<Infimum, EvalError> {
    let grid = scan_grid(dom, n.max(64), policy);
    let vals = par::map(&grid, |&x| e.eval(x, p));
    let mut best = 0;
    let mut best_val = f64::INFINITY;
    for (i, v) in vals.into_iter().enumerate() {
        let v = v?;
        if v < best_val {
            best_val = v;
            best = i;
        }
    }
    let (at, value) = refine_min(|x| e.eval(x, p).ok(), &grid, best);
    Ok(Infimum { value, at })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralBounds {
    /// inf W·V: bound for the quotient against Lebesgue mass.
    pub lambda: Infimum,
    /// inf W: bound for the quotient against the V-weighted mass.
    pub lambda_prime: Infimum,
}

pub fn spectral_lower_bounds(
    w: &Expr,
    v: &Expr,
    p: &ParamBindings,
    dom: &Domain,
    n: usize,
    policy: &GridPolicy,
) -> Result<SpectralBounds, EvalError> {
    let wv = mul(w.clone(), v.clone()).simplify();
    let (lambda, lambda_prime) = par::join(
        || weighted_infimum(&wv, p, dom, n, policy),
        || weighted_infimum(w, p, dom, n, policy),
    );
    Ok(SpectralBounds { lambda: lambda?, lambda_prime: lambda_prime? })
}

/// q(X) = aX² + bX + c examined on the open unit interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadraticForm {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum QuadraticVerdict {
    PositiveOn01,
    NotPositive,
    /// Non-negative on (0, 1) but touching zero inside it.
    Boundary,
}

impl QuadraticForm {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    /// Bracket polynomial of W·x² for h = x^{2−d}, V = (a + b x^α)^β / x^{2m},
    /// in the variable X = b x^α / (a + b x^α).
    pub fn from_power_binomial(d: f64, m: f64, alpha: f64, beta: f64) -> Self {
        let k = (d - 2.0 * m - 2.0) / 2.0;
        let a2b = alpha * alpha * beta;
        Self {
            a: 0.25 * a2b * beta - 0.5 * a2b,
            b: 0.5 * a2b + k * alpha * beta,
            c: k * k,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.a * x + self.b) * x + self.c
    }

    /// Abscissa of the vertex, −b/(2a); `None` when a = 0.
    pub fn axis(&self) -> Option<f64> {
        (self.a != 0.0).then(|| -self.b / (2.0 * self.a))
    }

    pub fn discriminant(&self) -> f64 {
        self.b * self.b - 4.0 * self.a * self.c
    }
}

pub fn quadratic_positivity(q: &QuadraticForm) -> QuadraticVerdict {
    let (q0, q1) = (q.value(0.0), q.value(1.0));
    let scale = q.a.abs() + q.b.abs() + q.c.abs();
    if scale == 0.0 {
        return QuadraticVerdict::Boundary;
    }
    let tiny = 1e-14 * scale;
    let ends_ok = q0 >= -tiny && q1 >= -tiny;
    if q.a <= 0.0 {
        // concave or linear: the minimum over [0, 1] sits at an endpoint, and
        // non-negative ends give strict positivity inside
        return if ends_ok { QuadraticVerdict::PositiveOn01 } else { QuadraticVerdict::NotPositive };
    }
    let axis = -q.b / (2.0 * q.a);
    if axis <= 0.0 || axis >= 1.0 {
        return if ends_ok { QuadraticVerdict::PositiveOn01 } else { QuadraticVerdict::NotPositive };
    }
    let disc = q.discriminant();
    let disc_tiny = 1e-14 * (q.b * q.b + (4.0 * q.a * q.c).abs());
    if disc < -disc_tiny {
        QuadraticVerdict::PositiveOn01
    } else if disc <= disc_tiny {
        QuadraticVerdict::Boundary
    } else {
        QuadraticVerdict::NotPositive
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Classification {
    NoWeight,
    Critical,
    Optimal,
    Indeterminate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HardyConfig {
    pub feller: FellerConfig,
    pub scan_points: usize,
    pub grid: GridPolicy,
}

impl Default for HardyConfig {
    fn default() -> Self {
        Self { feller: FellerConfig::default(), scan_points: 512, grid: GridPolicy::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HardyReport {
    #[serde(rename = "W")]
    pub w: Expr,
    pub recurrence: RecurrenceVerdict,
    pub v_recurrence: RecurrenceVerdict,
    pub positivity: Positivity,
    pub classification: Classification,
    pub optimality_integral: Option<IntegralVerdict>,
    pub spectral_lambda: Option<Infimum>,
    pub spectral_lambda_prime: Option<Infimum>,
    pub boundary_density: Expr,
    pub notes: Vec<String>,
}

/// Full certificate chain for a weight pair.
pub fn classify(wp: &WeightPair, cfg: &HardyConfig) -> Result<HardyReport, HardyError> {
    cfg.feller.base_point_for(&wp.dom)?;
    let w = derive_weight(wp);
    let vf = wp.v_form();
    let (v_rec, h_rec) = par::join(
        || recurrence_test(&vf, &wp.params, &wp.dom, &cfg.feller),
        || recurrence_test(&wp.h, &wp.params, &wp.dom, &cfg.feller),
    );
    let (v_rec, h_rec) = (v_rec?, h_rec?);
    let positivity = positivity_scan(&w, &wp.params, &wp.dom, cfg.scan_points, &cfg.grid);
    let wv = mul(w.clone(), wp.v.clone()).simplify();
    let (lambda, lambda_prime) = par::join(
        || weighted_infimum(&wv, &wp.params, &wp.dom, cfg.scan_points, &cfg.grid).ok(),
        || weighted_infimum(&w, &wp.params, &wp.dom, cfg.scan_points, &cfg.grid).ok(),
    );
    let mut notes = vec!["closability of the h-form on smooth compactly supported functions is assumed, not checked".to_string()];

    let mut optimality_integral = None;
    let classification = if v_rec.recurrent == Recurrence::Yes {
        notes.push("the V-form is recurrent, so no non-negative Hardy weight exists".into());
        Classification::NoWeight
    } else if h_rec.recurrent != Recurrence::Yes {
        notes.push(format!("h-form recurrence verdict is {:?}; criticality not certified", h_rec.recurrent));
        Classification::Indeterminate
    } else {
        match &positivity {
            Positivity::Negative { witness, value } => {
                notes.push(format!("W = {value:e} < 0 at x = {witness}"));
                Classification::Indeterminate
            }
            Positivity::Indeterminate { at, error } => {
                notes.push(format!("W could not be evaluated at x = {at}: {error}"));
                Classification::Indeterminate
            }
            Positivity::Nonnegative { .. } => {
                let verdict = optimality_test(wp, &w, &cfg.feller)?;
                let class = match verdict.tag {
                    IntegralTag::Divergent { .. } => Classification::Optimal,
                    IntegralTag::Convergent { .. } => Classification::Critical,
                    IntegralTag::Indeterminate { .. } => Classification::Indeterminate,
                };
                optimality_integral = Some(verdict);
                class
            }
        }
    };
    Ok(HardyReport {
        w,
        recurrence: h_rec,
        v_recurrence: v_rec,
        positivity,
        classification,
        optimality_integral,
        spectral_lambda: lambda,
        spectral_lambda_prime: lambda_prime,
        boundary_density: boundary_density(wp),
        notes,
    })
}
