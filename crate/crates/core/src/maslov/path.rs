//! Parametrized paths in the parameter space `(λ, θ, t)`.

use serde::Serialize;

use crate::potential::Potential;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    Lambda,
    Theta,
    T,
}

/// Which of the two planes moves along a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaneRole {
    /// The boundary plane `F¹_θ` (the path `Υ₁`).
    Boundary,
    /// The solution plane `F²_λ` or `G_{λ,t}` (the path `Υ₂`).
    Solution,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamPoint {
    pub lambda: f64,
    pub theta: f64,
    pub t: f64,
}

/// One straight piece of a path, affine in the path parameter `s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segment {
    pub label: String,
    pub variable: Variable,
    /// Path-parameter interval `[s_start, s_end]`.
    pub range: (f64, f64),
    /// Parameter values at `s_start`; all but `variable` stay frozen.
    pub frozen: ParamPoint,
    /// `+1` when the varying parameter increases with `s`, `-1` otherwise.
    pub orientation: i32,
    pub role: PlaneRole,
    /// Value of `variable` at `s_end`, kept exactly so that rounding in
    /// `s` cannot push the path past its end (e.g. to `t > 1`).
    pub target: f64,
}

impl Segment {
    pub fn new(label: &str, variable: Variable, range: (f64, f64), frozen: ParamPoint, orientation: i32) -> Result<Self> {
        if !(range.0 <= range.1) || !range.0.is_finite() || !range.1.is_finite() {
            return Err(Error::invalid(format!("segment {label} has an invalid range {range:?}")));
        }
        if orientation != 1 && orientation != -1 {
            return Err(Error::invalid("segment orientation must be +1 or -1"));
        }
        let role = if variable == Variable::Theta { PlaneRole::Boundary } else { PlaneRole::Solution };
        let target = Self::coordinate(variable, &frozen) + orientation as f64 * (range.1 - range.0);
        Ok(Self { label: label.to_string(), variable, range, frozen, orientation, role, target })
    }

    fn coordinate(variable: Variable, p: &ParamPoint) -> f64 {
        match variable {
            Variable::Lambda => p.lambda,
            Variable::Theta => p.theta,
            Variable::T => p.t,
        }
    }

    /// Segment moving one parameter from `from` to `to`, starting at path
    /// parameter `s0`.
    pub fn between(label: &str, variable: Variable, frozen: ParamPoint, to: f64, s0: f64) -> Result<Self> {
        let from = Self::coordinate(variable, &frozen);
        let orientation = if to >= from { 1 } else { -1 };
        let mut seg = Self::new(label, variable, (s0, s0 + (to - from).abs()), frozen, orientation)?;
        seg.target = to;
        Ok(seg)
    }

    pub fn length(&self) -> f64 {
        self.range.1 - self.range.0
    }

    pub fn is_degenerate(&self) -> bool {
        self.length() <= 0.0
    }

    /// Parameters at path parameter `s`.
    pub fn at(&self, s: f64) -> ParamPoint {
        let from = Self::coordinate(self.variable, &self.frozen);
        let (lo, hi) = if self.orientation > 0 { (from, self.target) } else { (self.target, from) };
        let v = if s >= self.range.1 { self.target } else { (from + self.orientation as f64 * (s - self.range.0)).clamp(lo, hi) };
        let mut p = self.frozen;
        match self.variable {
            Variable::Lambda => p.lambda = v,
            Variable::Theta => p.theta = v,
            Variable::T => p.t = v,
        }
        p
    }

    pub fn start(&self) -> ParamPoint {
        self.frozen
    }

    pub fn end(&self) -> ParamPoint {
        self.at(self.range.1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSpec {
    pub segments: Vec<Segment>,
    pub closed: bool,
}

impl PathSpec {
    pub fn single(segment: Segment) -> Self {
        Self { segments: vec![segment], closed: false }
    }

    /// Consecutive segments must meet in parameter space and in `s`.
    pub fn check_continuity(&self) -> Result<()> {
        let close = |a: ParamPoint, b: ParamPoint| {
            (a.lambda - b.lambda).abs() + (a.theta - b.theta).abs() + (a.t - b.t).abs() <= 1e-12 * (1.0 + a.lambda.abs())
        };
        for w in self.segments.windows(2) {
            if !close(w[0].end(), w[1].start()) || (w[0].range.1 - w[1].range.0).abs() > 1e-12 * (1.0 + w[0].range.1.abs()) {
                return Err(Error::invalid(format!("segments {} and {} do not meet", w[0].label, w[1].label)));
            }
        }
        if self.closed
            && let (Some(first), Some(last)) = (self.segments.first(), self.segments.last())
                && !close(last.end(), first.start()) {
                    return Err(Error::invalid("closed path does not return to its start"));
                }
        Ok(())
    }

    /// Largest `|λ|` and largest `t` visited, for sizing the integrator.
    pub fn extent(&self) -> (f64, f64) {
        let mut lam: f64 = 0.0;
        let mut t: f64 = 0.0;
        for seg in &self.segments {
            for p in [seg.start(), seg.end()] {
                lam = lam.max(p.lambda.abs());
                t = t.max(p.t);
            }
        }
        (lam, t)
    }
}

fn check_floor(pot: &Potential, lambda_inf: f64, r: f64) -> Result<()> {
    let floor = -pot.v_max();
    if !(lambda_inf < floor) {
        return Err(Error::invalid(format!(
            "lambda_inf = {lambda_inf} is not below the spectral floor {floor}"
        )));
    }
    if !(lambda_inf < r) {
        return Err(Error::invalid("lambda_inf must lie below r"));
    }
    Ok(())
}

/// Boundary of `[θ₁, θ₂] × [λ_∞, r]` traversed as Γ₁ (λ up at θ₁), Γ₂ (θ up
/// at λ = r), Γ₃ (λ down at θ₂), Γ₄ (θ down at λ_∞).
pub fn rectangle_theta(pot: &Potential, theta1: f64, theta2: f64, r: f64, lambda_inf: f64) -> Result<PathSpec> {
    let two_pi = 2.0 * std::f64::consts::PI;
    if !(0.0 <= theta1 && theta1 < theta2 && theta2 < two_pi) {
        return Err(Error::invalid(format!("need 0 <= theta1 < theta2 < 2π, got {theta1}, {theta2}")));
    }
    check_floor(pot, lambda_inf, r)?;
    let p = |lambda, theta| ParamPoint { lambda, theta, t: 1.0 };
    let g1 = Segment::between("Γ1", Variable::Lambda, p(lambda_inf, theta1), r, lambda_inf)?;
    let g2 = Segment::between("Γ2", Variable::Theta, p(r, theta1), theta2, g1.range.1)?;
    let g3 = Segment::between("Γ3", Variable::Lambda, p(r, theta2), lambda_inf, g2.range.1)?;
    let g4 = Segment::between("Γ4", Variable::Theta, p(lambda_inf, theta2), theta1, g3.range.1)?;
    let path = PathSpec { segments: vec![g1, g2, g3, g4], closed: true };
    path.check_continuity()?;
    Ok(path)
}

/// Boundary of `[τ, 1] × [λ^∞, r]` in the `(t, λ)` plane traversed as Σ₁ (λ
/// up at t = τ), Σ₂ (t up at λ = r), Σ₃ (λ down at t = 1), Σ₄ (t down at λ^∞).
pub fn rectangle_t(pot: &Potential, tau: f64, r: f64, lambda_sup_inf: f64, theta: f64) -> Result<PathSpec> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::invalid(format!("tau = {tau} must lie in (0, 1]")));
    }
    if !pot.is_symmetric_interval() {
        return Err(Error::invalid("the rescaled family needs a symmetric interval [-L, L]"));
    }
    check_floor(pot, lambda_sup_inf, r)?;
    let p = |lambda, t| ParamPoint { lambda, theta, t };
    let s1 = Segment::between("Σ1", Variable::Lambda, p(lambda_sup_inf, tau), r, lambda_sup_inf)?;
    let s2 = Segment::between("Σ2", Variable::T, p(r, tau), 1.0, s1.range.1)?;
    let s3 = Segment::between("Σ3", Variable::Lambda, p(r, 1.0), lambda_sup_inf, s2.range.1)?;
    let s4 = Segment::between("Σ4", Variable::T, p(lambda_sup_inf, 1.0), tau, s3.range.1)?;
    let path = PathSpec { segments: vec![s1, s2, s3, s4], closed: true };
    path.check_continuity()?;
    Ok(path)
}
