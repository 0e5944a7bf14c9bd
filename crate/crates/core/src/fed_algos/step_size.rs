//! Step-size schedules. Each schedule sets η to the minimum over a list of
//! closed-form branches; a branch whose value is not a positive finite number
//! (typically because σ, Λ or ξ is zero) counts as `+∞`.

use std::f64::consts::E;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TheoremId {
    /// LESGD on smooth monotone operators.
    T1,
    /// LESGD on affine operators.
    T2,
    /// LIPPAX with bounded operators.
    T3,
    /// LIPPAX with bounded operators and bounded second derivative.
    T4,
    /// SLIPPAX (Gaussian smoothing) with bounded operators.
    T5,
    /// LSGD on co-coercive operators.
    T6,
    /// Local dual averaging on composite problems.
    T7,
    /// Heterogeneous LESGD.
    T8,
}

impl TheoremId {
    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::T1 => "T1",
            TheoremId::T2 => "T2",
            TheoremId::T3 => "T3",
            TheoremId::T4 => "T4",
            TheoremId::T5 => "T5",
            TheoremId::T6 => "T6",
            TheoremId::T7 => "T7",
            TheoremId::T8 => "T8",
        }
    }

    fn uses_inner_loop(self) -> bool {
        matches!(self, TheoremId::T3 | TheoremId::T4 | TheoremId::T5)
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Problem constants a schedule may consume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemConstants {
    pub lipschitz: f64,
    pub bound: f64,
    pub cocoercivity: f64,
    pub second_order: f64,
    pub dim: usize,
    /// Heterogeneity ξ (only for T8).
    pub heterogeneity: Option<f64>,
}

/// Federation shape and noise level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shape {
    pub clients: usize,
    pub local_steps: usize,
    pub rounds: usize,
    pub sigma: f64,
    pub radius: f64,
}

/// How δ is derived from η for the smoothing schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaRule {
    /// `δ = ησ/√d`.
    #[default]
    SqrtDim,
    /// `δ = ησ/d^{1/4}`.
    FourthRootDim,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepSizePlan {
    pub theorem: TheoremId,
    pub eta: f64,
    /// Inner step `1/(η(L + 1/η)²)` for the proximal schedules.
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    /// Index (0-based, in the schedule's listed order) of the branch that set η.
    pub active_branch: usize,
    /// Every branch value, `+∞` for inactive ones.
    pub branches: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepSizeOptions {
    pub delta_rule: DeltaRule,
    /// Use this branch instead of the minimum.
    pub forced_branch: Option<usize>,
}

fn branch(value: f64) -> f64 {
    if value.is_finite() && value > 0.0 {
        value
    } else {
        f64::INFINITY
    }
}

/// Inner step size `γ = 1/(η(L + 1/η)²)`.
pub fn inner_step(eta: f64, lipschitz: f64) -> f64 {
    let s = lipschitz + 1.0 / eta;
    1.0 / (eta * s * s)
}

/// Smoothing radius `δ = ησ/√d` (or `ησ/d^{1/4}`).
pub fn smoothing_radius(eta: f64, sigma: f64, dim: usize, rule: DeltaRule) -> f64 {
    let d = dim as f64;
    match rule {
        DeltaRule::SqrtDim => eta * sigma / d.sqrt(),
        DeltaRule::FourthRootDim => eta * sigma / d.powf(0.25),
    }
}

/// Default number of inner proximal steps, `⌈log₄(KR)⌉ + 2`.
pub fn default_inner_steps(local_steps: usize, rounds: usize) -> usize {
    let t = (local_steps * rounds).max(1) as f64;
    (t.ln() / 4f64.ln()).ceil() as usize + 2
}

fn require(theorem: TheoremId, symbol: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::MissingConstant {
            theorem: theorem.as_str(),
            symbol,
        })
    }
}

fn branches(theorem: TheoremId, c: &ProblemConstants, s: &Shape) -> Result<Vec<f64>> {
    let l = c.lipschitz;
    let (m, k, r) = (s.clients as f64, s.local_steps as f64, s.rounds as f64);
    let (sigma, d) = (s.sigma, s.radius);
    let dim = c.dim as f64;
    let cbrt = |x: f64| x.cbrt();
    require(theorem, "L", l)?;
    let raw = match theorem {
        TheoremId::T1 => vec![
            1.0 / ((14.0 * k).sqrt() * l),
            d * m.sqrt() / (sigma * (6.0 * k * r).sqrt()),
            d.powf(2.0 / 3.0)
                / (cbrt(936.0) * E.powf(2.0 / 3.0) * k.powf(2.0 / 3.0) * cbrt(r) * sigma.powf(2.0 / 3.0) * cbrt(l)),
        ],
        TheoremId::T2 => vec![
            1.0 / l,
            d * m.sqrt() / (sigma * (6.0 * k * r).sqrt()),
            d.powf(2.0 / 3.0) / (cbrt(180.0) * k.powf(2.0 / 3.0) * cbrt(r) * sigma.powf(2.0 / 3.0) * cbrt(l)),
        ],
        TheoremId::T3 => {
            require(theorem, "G", c.bound)?;
            vec![
                1.0 / l,
                d * m.sqrt() / (sigma * (k * r).sqrt()),
                d.powf(0.4) / ((60.0 * E).powf(0.2) * k.powf(0.6) * r.powf(0.2) * sigma.powf(0.4) * l.powf(0.4)),
                d.powf(2.0 / 3.0) / (cbrt(54.0 * E) * k.powf(2.0 / 3.0) * cbrt(r) * cbrt(l) * sigma.powf(2.0 / 3.0)),
                d / (sigma * (15.0 * k * r).sqrt()),
            ]
        }
        TheoremId::T4 => {
            require(theorem, "G", c.bound)?;
            require(theorem, "Λ", c.second_order)?;
            vec![
                1.0 / l,
                d.powf(0.4) / (k.powf(0.6) * r.powf(0.2) * sigma.powf(0.4) * l.powf(0.4)),
                d.powf(2.0 / 3.0) / (k.powf(2.0 / 3.0) * cbrt(r) * sigma.powf(2.0 / 3.0) * cbrt(l)),
                d.sqrt() / (k.powf(0.25) * r.powf(0.25) * sigma.sqrt() * l.sqrt()),
                cbrt(d) / (cbrt(c.second_order) * sigma.powf(2.0 / 3.0) * r.powf(1.0 / 6.0) * k.powf(1.0 / 6.0)),
                d * m.sqrt() / (k.sqrt() * r.sqrt() * sigma),
            ]
        }
        TheoremId::T5 => {
            require(theorem, "G", c.bound)?;
            vec![
                d.sqrt() / (k.powf(0.25) * r.powf(0.25) * l.sqrt() * sigma.sqrt() * dim.powf(0.125)),
                d.powf(0.4) / (sigma.powf(0.4) * l.powf(0.4) * dim.powf(0.1) * k.powf(0.6) * r.powf(0.2)),
                d.powf(2.0 / 3.0) / (k.powf(2.0 / 3.0) * cbrt(r) * sigma.powf(2.0 / 3.0) * l.powf(2.0 / 3.0)),
                1.0 / l,
            ]
        }
        TheoremId::T6 => {
            require(theorem, "β", c.cocoercivity)?;
            vec![
                1.0 / c.cocoercivity,
                d * m.sqrt() / ((k * r).sqrt() * sigma),
                d.powf(2.0 / 3.0) / (2f64.sqrt() * k.powf(2.0 / 3.0) * cbrt(r) * cbrt(l) * sigma.powf(2.0 / 3.0)),
            ]
        }
        TheoremId::T7 => {
            require(theorem, "G", c.bound)?;
            vec![
                d * m.sqrt() / (sigma * (6.0 * k * r).sqrt()),
                d.powf(2.0 / 3.0) / (cbrt(17.0) * cbrt(k) * cbrt(r) * l.powf(2.0 / 3.0) * c.bound.powf(2.0 / 3.0)),
                1.0 / (10f64.sqrt() * l),
            ]
        }
        TheoremId::T8 => {
            let xi = c.heterogeneity.ok_or(Error::MissingConstant {
                theorem: "T8",
                symbol: "ξ",
            })?;
            require(theorem, "ξ", xi)?;
            vec![
                1.0 / (k.sqrt() * l),
                d * m.sqrt() / (sigma * (k * r).sqrt()),
                d.powf(2.0 / 3.0) / (k.powf(2.0 / 3.0) * cbrt(r) * sigma.powf(2.0 / 3.0) * cbrt(l)),
                d.powf(2.0 / 3.0) / (xi.powf(2.0 / 3.0) * k * cbrt(r) * cbrt(l)),
                d / ((xi * sigma).sqrt() * k.powf(0.75) * r.sqrt()),
                d / (xi * k * r.sqrt()),
            ]
        }
    };
    Ok(raw.into_iter().map(branch).collect())
}

pub fn step_size(theorem: TheoremId, constants: &ProblemConstants, shape: &Shape) -> Result<StepSizePlan> {
    step_size_with(theorem, constants, shape, StepSizeOptions::default())
}

pub fn step_size_with(
    theorem: TheoremId,
    constants: &ProblemConstants,
    shape: &Shape,
    options: StepSizeOptions,
) -> Result<StepSizePlan> {
    if shape.clients == 0 || shape.local_steps == 0 || shape.rounds == 0 {
        return Err(Error::param("shape", "M, K and R must be at least 1"));
    }
    if !(shape.radius > 0.0) || !(shape.sigma >= 0.0) {
        return Err(Error::param("shape", "need D > 0 and σ ≥ 0"));
    }
    let values = branches(theorem, constants, shape)?;
    let (active_branch, eta) = match options.forced_branch {
        Some(i) => {
            let v = *values
                .get(i)
                .ok_or_else(|| Error::param("branch", format!("{theorem} has {} branches", values.len())))?;
            (i, v)
        }
        None => values
            .iter()
            .copied()
            .enumerate()
            // strict comparison keeps the lowest index on ties
            .fold(
                (0, f64::INFINITY),
                |best, (i, v)| if v < best.1 { (i, v) } else { best },
            ),
    };
    if !eta.is_finite() {
        return Err(Error::param(
            "eta",
            format!("{theorem}: selected branch is infinite (all constants degenerate?)"),
        ));
    }
    let gamma = theorem.uses_inner_loop().then(|| inner_step(eta, constants.lipschitz));
    let delta =
        (theorem == TheoremId::T5).then(|| smoothing_radius(eta, shape.sigma, constants.dim, options.delta_rule));
    Ok(StepSizePlan {
        theorem,
        eta,
        gamma,
        delta,
        active_branch,
        branches: values,
    })
}
