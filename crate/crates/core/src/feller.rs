//! Recurrence of radial energy forms ∫ u'² h t^{d−1} dt via Feller's test:
//! the form is recurrent when the scale integral ∫_c^x dt / (h(t) t^{d−1})
//! diverges toward both ends of the interval.
//!
//! Divergence is decided numerically. Each endpoint is approached along a
//! geometric ladder of shells, every shell is integrated adaptively, and the
//! sequence of shell increments is classified.

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::expr::build::{div, mul, pow};
use crate::expr::{Expr, ParamBindings};
use crate::{par, quad};

/// Open interval (l, r) with operator dimension d.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    pub l: f64,
    pub r: f64,
    pub d: f64,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum DomainError {
    #[error("empty interval: l = {l} must be below r = {r}")]
    Empty { l: f64, r: f64 },
    #[error("dimension {0} must be a finite value >= 1")]
    Dimension(f64),
    #[error("radial measure with d = {d} needs l >= 0, got {l}")]
    NegativeRadius { l: f64, d: f64 },
}

impl Domain {
    pub fn new(l: f64, r: f64, d: f64) -> Result<Domain, DomainError> {
        if l.is_nan() || r.is_nan() || l >= r || l == f64::INFINITY || r == f64::NEG_INFINITY {
            return Err(DomainError::Empty { l, r });
        }
        if !(d >= 1.0 && d.is_finite()) {
            return Err(DomainError::Dimension(d));
        }
        if d > 1.0 && l < 0.0 {
            return Err(DomainError::NegativeRadius { l, d });
        }
        Ok(Domain { l, r, d })
    }

    /// Default base point of the scale function.
    pub fn default_base_point(&self) -> f64 {
        match (self.l.is_finite(), self.r.is_finite()) {
            (true, true) => 0.5 * (self.l + self.r),
            (true, false) => (self.l + 1.0).max(1.0),
            (false, true) => (self.r - 1.0).min(-1.0),
            (false, false) => 0.0,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.l && x < self.r
    }
}

fn ser_endpoint<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

impl Serialize for Domain {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        struct End(f64);
        impl Serialize for End {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                ser_endpoint(&self.0, s)
            }
        }
        let mut st = s.serialize_struct("Domain", 3)?;
        st.serialize_field("l", &End(self.l))?;
        st.serialize_field("r", &End(self.r))?;
        st.serialize_field("d", &self.d)?;
        st.end()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FellerConfig {
    /// Base point c of the scale function; `None` picks [`Domain::default_base_point`].
    pub base_point: Option<f64>,
    pub ladder_factor: f64,
    pub shells: usize,
    pub quad_tolerance: f64,
    /// Partial integral over first-shell increment beyond which growth counts as divergence.
    pub divergence_threshold: f64,
    /// Geometric decay ratio per shell at or below which an integral may converge.
    pub tail_decay_ratio: f64,
    /// Largest extrapolated tail, relative to the partial integral, accepted as convergence.
    pub tail_tolerance: f64,
}

impl Default for FellerConfig {
    fn default() -> Self {
        Self {
            base_point: None,
            ladder_factor: 4.0,
            shells: 24,
            quad_tolerance: 1e-10,
            divergence_threshold: 1e6,
            tail_decay_ratio: 0.9,
            tail_tolerance: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ConfigError {
    #[error("base point {c} is not inside ({l}, {r})")]
    BasePoint { c: f64, l: f64, r: f64 },
    #[error("ladder factor must exceed 1, got {0}")]
    LadderFactor(f64),
    #[error("at least 6 shells are needed, got {0}")]
    Shells(usize),
}

impl FellerConfig {
    pub fn base_point_for(&self, dom: &Domain) -> Result<f64, ConfigError> {
        let c = self.base_point.unwrap_or_else(|| dom.default_base_point());
        if !dom.contains(c) {
            return Err(ConfigError::BasePoint { c, l: dom.l, r: dom.r });
        }
        if self.ladder_factor.is_nan() || self.ladder_factor <= 1.0 {
            return Err(ConfigError::LadderFactor(self.ladder_factor));
        }
        if self.shells < 6 {
            return Err(ConfigError::Shells(self.shells));
        }
        Ok(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Endpoint {
    Left,
    Right,
}

/// Growth rate of a divergent partial integral in terms of the shell scale
/// (distance to a finite endpoint, magnitude toward an infinite one).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "exponent")]
pub enum Rate {
    Power(f64),
    Log,
    Unclassified,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict")]
pub enum IntegralTag {
    Convergent { value: f64 },
    Divergent { rate: Rate },
    Indeterminate { reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShellEvidence {
    pub endpoint: f64,
    pub partial: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegralVerdict {
    #[serde(flatten)]
    pub tag: IntegralTag,
    pub evidence: Vec<ShellEvidence>,
}

impl IntegralVerdict {
    pub fn is_divergent(&self) -> bool {
        matches!(self.tag, IntegralTag::Divergent { .. })
    }

    pub fn is_convergent(&self) -> bool {
        matches!(self.tag, IntegralTag::Convergent { .. })
    }

    pub fn value(&self) -> Option<f64> {
        match self.tag {
            IntegralTag::Convergent { value } => Some(value),
            _ => None,
        }
    }

    fn indeterminate(reason: impl Into<String>, evidence: Vec<ShellEvidence>) -> Self {
        Self { tag: IntegralTag::Indeterminate { reason: reason.into() }, evidence }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Recurrence {
    Yes,
    No,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecurrenceVerdict {
    pub left: IntegralVerdict,
    pub right: IntegralVerdict,
    pub recurrent: Recurrence,
}

impl RecurrenceVerdict {
    pub fn combine(left: IntegralVerdict, right: IntegralVerdict) -> Self {
        let recurrent = if left.is_convergent() || right.is_convergent() {
            Recurrence::No
        } else if left.is_divergent() && right.is_divergent() {
            Recurrence::Yes
        } else {
            Recurrence::Indeterminate
        };
        Self { left, right, recurrent }
    }
}

/// 1 / (h(t) t^{d−1}); just 1/h when d = 1.
pub fn scale_integrand(h: &Expr, d: f64) -> Expr {
    div(Expr::c(1.0), mul(h.clone(), pow(Expr::x(), Expr::c(d - 1.0)))).simplify()
}

/// Smallest distance to a finite nonzero endpoint, relative to its magnitude,
/// that the ladder may reach before cancellation in `endpoint ± distance`
/// swamps the integrand.
const RELATIVE_RESOLUTION: f64 = 1e-9;

pub fn classify_endpoint_integral(
    f: &Expr,
    p: &ParamBindings,
    endpoint: Endpoint,
    dom: &Domain,
    cfg: &FellerConfig,
) -> Result<IntegralVerdict, ConfigError> {
    let c = cfg.base_point_for(dom)?;
    let f = f.bind(p);
    let eval = |x: f64| f.eval(x, p).ok();
    let factor = cfg.ladder_factor;
    let target = match endpoint {
        Endpoint::Left => dom.l,
        Endpoint::Right => dom.r,
    };
    let sign = if endpoint == Endpoint::Right { 1.0 } else { -1.0 };

    // ladder point k as a function of the previous point
    let finite = target.is_finite();
    let dist0 = (c - target).abs();
    let mut shells = cfg.shells;
    if finite && target != 0.0 {
        let max_k = ((dist0 / (RELATIVE_RESOLUTION * target.abs())).ln() / factor.ln()).floor();
        shells = shells.min(max_k.max(6.0) as usize);
    }
    let start_mag = c.abs().max(1.0);

    let mut evidence = Vec::with_capacity(shells);
    let mut increments: Vec<f64> = Vec::with_capacity(shells);
    let mut scales: Vec<f64> = Vec::with_capacity(shells);
    let mut prev = c;
    let mut partial = 0.0;
    for k in 1..=shells {
        let mut next = if finite {
            target - sign * dist0 / factor.powi(k as i32)
        } else if k == 1 && sign * c < start_mag {
            sign * start_mag * factor
        } else {
            prev * factor
        };
        let mut attempt = 0;
        let inc = loop {
            let (a, b) = if prev < next { (prev, next) } else { (next, prev) };
            match quad::adaptive_simpson(eval, a, b, cfg.quad_tolerance) {
                Ok(v) => break Some(v.abs()),
                // past the range of f64 (overflow far out): judge the shells we have
                Err(_) if increments.len() >= 4 => break None,
                Err(_) if attempt < 40 => {
                    attempt += 1;
                    next = if finite || prev == 0.0 || prev.signum() != next.signum() {
                        0.5 * (prev + next)
                    } else {
                        sign * (prev.abs() * next.abs()).sqrt()
                    };
                }
                Err(e) => {
                    return Ok(IntegralVerdict::indeterminate(
                        format!("integrand not finite near x = {}", e.at),
                        evidence,
                    ))
                }
            }
        };
        let Some(inc) = inc else { break };
        partial += inc;
        evidence.push(ShellEvidence { endpoint: next, partial });
        increments.push(inc);
        scales.push(if finite { (next - target).abs() } else { next.abs() });
        prev = next;

        let n = increments.len();
        if n >= 3
            && partial > cfg.divergence_threshold * increments[0].max(f64::MIN_POSITIVE)
            && increments[n - 1] >= increments[n - 2]
            && increments[n - 2] >= increments[n - 3]
        {
            let rate = rate_from(&increments, &scales, 0);
            return Ok(IntegralVerdict { tag: IntegralTag::Divergent { rate }, evidence });
        }
        if !finite && next.abs() > 1e300 {
            break;
        }
    }
    Ok(classify_increments(&increments, &scales, partial, cfg, evidence))
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn rate_from(increments: &[f64], scales: &[f64], from: usize) -> Rate {
    let pts: Vec<(f64, f64)> = increments[from..]
        .iter()
        .zip(&scales[from..])
        .filter(|(i, s)| **i > 0.0 && **s > 0.0)
        .map(|(i, s)| (s.ln(), i.ln()))
        .collect();
    if pts.len() < 2 {
        return Rate::Unclassified;
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let slope = least_squares_slope(&xs, &ys);
    if slope.abs() < 0.02 {
        Rate::Log
    } else {
        Rate::Power(slope)
    }
}

fn classify_increments(
    increments: &[f64],
    scales: &[f64],
    partial: f64,
    cfg: &FellerConfig,
    evidence: Vec<ShellEvidence>,
) -> IntegralVerdict {
    let k = increments.len();
    if k < 4 || !partial.is_finite() {
        return IntegralVerdict::indeterminate("ladder too short", evidence);
    }
    let last = increments[k - 1];
    if last <= 1e-16 * partial || last == 0.0 {
        return IntegralVerdict { tag: IntegralTag::Convergent { value: partial }, evidence };
    }
    let from = k - (k / 2).max(4);
    let tail = &increments[from..];
    if tail.iter().any(|v| *v <= 0.0) {
        return IntegralVerdict::indeterminate("vanishing shell increments", evidence);
    }
    let idx: Vec<f64> = (from..k).map(|i| i as f64).collect();
    let logs: Vec<f64> = tail.iter().map(|v| v.ln()).collect();
    let rho = least_squares_slope(&idx, &logs).exp();

    let converge = |rho: f64, evidence: Vec<ShellEvidence>| {
        let tail_est = last * rho / (1.0 - rho);
        if tail_est <= cfg.tail_tolerance * partial {
            IntegralVerdict { tag: IntegralTag::Convergent { value: partial + tail_est }, evidence }
        } else {
            IntegralVerdict::indeterminate(
                format!("decay ratio {rho:.4} leaves tail estimate {tail_est:.3e}"),
                evidence,
            )
        }
    };

    if rho >= 1.0 - 1e-3 {
        let rate = rate_from(increments, scales, from);
        return IntegralVerdict { tag: IntegralTag::Divergent { rate }, evidence };
    }
    if rho <= cfg.tail_decay_ratio {
        return converge(rho, evidence);
    }
    // Sub-geometric decay: harmonic increments (1/k) keep 1/(1−ρ_k) − k flat,
    // geometric ones make it fall by one per shell.
    let ratios: Vec<f64> = tail.windows(2).map(|w| w[1] / w[0]).collect();
    if ratios.iter().all(|r| *r < 1.0) {
        let m: Vec<f64> = ratios
            .iter()
            .enumerate()
            .map(|(i, r)| 1.0 / (1.0 - r) - (from + i) as f64)
            .collect();
        let mi: Vec<f64> = (0..m.len()).map(|i| (from + i) as f64).collect();
        if least_squares_slope(&mi, &m) >= -0.1 {
            return IntegralVerdict { tag: IntegralTag::Divergent { rate: Rate::Unclassified }, evidence };
        }
    }
    converge(rho, evidence)
}

/// Feller's test on both ends of the domain for the form with weight h.
pub fn recurrence_test(
    h: &Expr,
    p: &ParamBindings,
    dom: &Domain,
    cfg: &FellerConfig,
) -> Result<RecurrenceVerdict, ConfigError> {
    let f = scale_integrand(h, dom.d);
    let (left, right) = par::join(
        || classify_endpoint_integral(&f, p, Endpoint::Left, dom, cfg),
        || classify_endpoint_integral(&f, p, Endpoint::Right, dom, cfg),
    );
    Ok(RecurrenceVerdict::combine(left?, right?))
}
