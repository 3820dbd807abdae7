//! Bessel pairs: positive solutions of u'' + ((d−1)/x + V'/V) u' + W u = 0.

use serde::Serialize;
use thiserror::Error;

use crate::expr::build::{div, pow};
use crate::expr::{EvalError, Expr, ParamBindings};
use crate::hardy::WeightPair;
use crate::par;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum OdeError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid problem: {0}")]
    Invalid(String),
}

/// √(h/V), annihilated by the Schrödinger form with W = J^d(h) − J^d(V).
pub fn ground_state(wp: &WeightPair) -> Expr {
    pow(div(wp.h.clone(), wp.v.clone()), Expr::c(0.5)).simplify()
}

/// Coefficients of the first-order system for (u, u').
struct Field<'a> {
    v: &'a Expr,
    dv: Expr,
    w: &'a Expr,
    d: f64,
    params: &'a ParamBindings,
}

impl<'a> Field<'a> {
    fn new(v: &'a Expr, w: &'a Expr, d: f64, params: &'a ParamBindings) -> Self {
        Self { v, dv: v.differentiate(), w, d, params }
    }

    /// (drift, potential) with u'' = −drift·u' − potential·u.
    fn coeffs(&self, x: f64) -> Result<(f64, f64), EvalError> {
        let radial = if self.d == 1.0 { 0.0 } else { (self.d - 1.0) / x };
        let drift = radial + self.dv.eval(x, self.params)? / self.v.eval(x, self.params)?;
        Ok((drift, self.w.eval(x, self.params)?))
    }

    fn rhs(&self, x: f64, (u, du): (f64, f64)) -> Result<(f64, f64), EvalError> {
        let (drift, pot) = self.coeffs(x)?;
        Ok((du, -drift * du - pot * u))
    }
}

/// max over the grid of |u'' + ((d−1)/x + V'/V) u' + W u|, with symbolic derivatives.
pub fn ode_residual(
    u: &Expr,
    v: &Expr,
    w: &Expr,
    d: f64,
    grid: &[f64],
    params: &ParamBindings,
) -> Result<f64, EvalError> {
    let du = u.differentiate();
    let ddu = du.differentiate();
    let field = Field::new(v, w, d, params);
    let vals = par::map(grid, |&x| -> Result<f64, EvalError> {
        let (drift, pot) = field.coeffs(x)?;
        Ok((ddu.eval(x, params)? + drift * du.eval(x, params)? + pot * u.eval(x, params)?).abs())
    });
    let mut worst = 0.0f64;
    for r in vals {
        worst = worst.max(r?);
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OdeProblem {
    #[serde(rename = "V")]
    pub v: Expr,
    #[serde(rename = "W")]
    pub w: Expr,
    pub d: f64,
    pub a: f64,
    pub b: f64,
    pub x0: f64,
    pub u0: f64,
    pub du0: f64,
    pub step: f64,
    pub params: ParamBindings,
}

impl OdeProblem {
    /// Problem on [a, b] started at the default point: √(ab) for positive
    /// intervals, the midpoint otherwise.
    pub fn new(v: Expr, w: Expr, d: f64, a: f64, b: f64, params: ParamBindings) -> Self {
        let x0 = if a > 0.0 { (a * b).sqrt() } else { 0.5 * (a + b) };
        Self { v, w, d, a, b, x0, u0: 1.0, du0: 0.0, step: 1e-3, params }
    }

    pub fn seeded(mut self, x0: f64, u0: f64, du0: f64) -> Self {
        self.x0 = x0;
        self.u0 = u0;
        self.du0 = du0;
        self
    }

    /// Seed with the values of `u` and u' at x0.
    pub fn seeded_from(self, u: &Expr) -> Result<Self, EvalError> {
        let x0 = self.x0;
        let u0 = u.eval(x0, &self.params)?;
        let du0 = u.differentiate().eval(x0, &self.params)?;
        Ok(self.seeded(x0, u0, du0))
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    fn validate(&self) -> Result<(), OdeError> {
        if !(self.a < self.b && self.a <= self.x0 && self.x0 <= self.b) {
            return Err(OdeError::Invalid(format!("x0 = {} outside [{}, {}]", self.x0, self.a, self.b)));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(OdeError::Invalid(format!("step {} not positive", self.step)));
        }
        for x in [self.a, self.x0, self.b] {
            let v = self.v.eval(x, &self.params)?;
            if v <= 0.0 {
                return Err(OdeError::Invalid(format!("V = {v} not positive at x = {x}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub x: f64,
    pub u: f64,
    pub du: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OdeSolution {
    pub samples: Vec<Sample>,
    pub positive: bool,
    pub min_value: f64,
    /// Integration stopped early after |u| exceeded the blow-up bound.
    pub truncated: bool,
}

pub const BLOW_UP: f64 = 1e12;
const MAX_CHANGE: f64 = 0.1;
const MAX_HALVINGS: u32 = 24;

fn rk4(f: &Field<'_>, x: f64, y: (f64, f64), h: f64) -> Result<(f64, f64), EvalError> {
    let k1 = f.rhs(x, y)?;
    let k2 = f.rhs(x + 0.5 * h, (y.0 + 0.5 * h * k1.0, y.1 + 0.5 * h * k1.1))?;
    let k3 = f.rhs(x + 0.5 * h, (y.0 + 0.5 * h * k2.0, y.1 + 0.5 * h * k2.1))?;
    let k4 = f.rhs(x + h, (y.0 + h * k3.0, y.1 + h * k3.1))?;
    Ok((
        y.0 + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        y.1 + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    ))
}

fn too_big(old: f64, new: f64) -> bool {
    (new - old).abs() > MAX_CHANGE * old.abs().max(new.abs())
}

/// Integrate from x0 to `end`; returns samples after x0 and whether blow-up stopped it.
fn sweep(f: &Field<'_>, p: &OdeProblem, end: f64) -> Result<(Vec<Sample>, bool), EvalError> {
    let dir = if end >= p.x0 { 1.0 } else { -1.0 };
    let h_min = p.step / 2f64.powi(MAX_HALVINGS as i32);
    let mut out = Vec::new();
    let (mut x, mut y) = (p.x0, (p.u0, p.du0));
    let mut h = p.step;
    while (end - x) * dir > 1e-15 * end.abs().max(1.0) {
        let hs = h.min((end - x).abs());
        let next = rk4(f, x, y, dir * hs)?;
        let unstable = too_big(y.0, next.0) || too_big(y.1, next.1);
        if unstable && hs > h_min && hs == h {
            h *= 0.5;
            continue;
        }
        x = if hs == (end - x).abs() { end } else { x + dir * hs };
        y = next;
        out.push(Sample { x, u: y.0, du: y.1 });
        if !y.0.is_finite() || y.0.abs() > BLOW_UP {
            return Ok((out, true));
        }
        if !unstable {
            h = (2.0 * h).min(p.step);
        }
    }
    Ok((out, false))
}

/// RK4 integration from x0 out to both ends of [a, b].
pub fn shoot(p: &OdeProblem) -> Result<OdeSolution, OdeError> {
    p.validate()?;
    let f = Field::new(&p.v, &p.w, p.d, &p.params);
    let (left, right) = par::join(|| sweep(&f, p, p.a), || sweep(&f, p, p.b));
    let ((left, lt), (right, rt)) = (left?, right?);
    let mut samples: Vec<Sample> = left.into_iter().rev().collect();
    samples.push(Sample { x: p.x0, u: p.u0, du: p.du0 });
    samples.extend(right);
    let min_value = samples.iter().map(|s| s.u).fold(f64::INFINITY, f64::min);
    Ok(OdeSolution { samples, positive: min_value > 0.0, min_value, truncated: lt || rt })
}

#[cfg(test)]
mod tests;
