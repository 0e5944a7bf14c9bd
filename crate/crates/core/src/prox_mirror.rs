//! Composite regularizers φ, their proximal maps and the Euclidean mirror map
//! `∇h_t*` for `h_t = ½‖·‖² + tηφ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vector;

/// Convex regularizer. Block-separable composites (e.g. `g₁(x) + g₂(y)` on a
/// stacked saddle variable) are expressed with [`RegularizerSpec::Blocks`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RegularizerSpec {
    #[default]
    Zero,
    L1 {
        lambda: f64,
    },
    BoxIndicator {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// Consecutive coordinate blocks, each with its own regularizer.
    Blocks {
        parts: Vec<RegularizerBlock>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularizerBlock {
    pub len: usize,
    pub reg: RegularizerSpec,
}

fn soft_threshold(u: f64, t: f64) -> f64 {
    if u > t {
        u - t
    } else if u < -t {
        u + t
    } else {
        0.0
    }
}

impl RegularizerSpec {
    pub fn is_zero(&self) -> bool {
        match self {
            RegularizerSpec::Zero => true,
            RegularizerSpec::L1 { lambda } => *lambda == 0.0,
            RegularizerSpec::BoxIndicator { .. } => false,
            RegularizerSpec::Blocks { parts } => parts.iter().all(|p| p.reg.is_zero()),
        }
    }

    /// Check parameters against a dimension.
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            RegularizerSpec::Zero => Ok(()),
            RegularizerSpec::L1 { lambda } => {
                if *lambda >= 0.0 && lambda.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param("lambda", "must be finite and nonnegative"))
                }
            }
            RegularizerSpec::BoxIndicator { lo, hi } => {
                Error::check_dim(dim, lo.len())?;
                Error::check_dim(dim, hi.len())?;
                if lo.iter().zip(hi).any(|(l, h)| !(l <= h)) {
                    return Err(Error::param("box", "need lo ≤ hi in every coordinate"));
                }
                Ok(())
            }
            RegularizerSpec::Blocks { parts } => {
                let total: usize = parts.iter().map(|p| p.len).sum();
                Error::check_dim(dim, total)?;
                parts.iter().try_for_each(|p| p.reg.validate(p.len))
            }
        }
    }

    /// Whether `u` lies in the domain of φ.
    pub fn contains(&self, u: &[f64]) -> bool {
        self.value_slice(u).is_finite()
    }

    fn value_slice(&self, u: &[f64]) -> f64 {
        match self {
            RegularizerSpec::Zero => 0.0,
            RegularizerSpec::L1 { lambda } => lambda * u.iter().map(|v| v.abs()).sum::<f64>(),
            RegularizerSpec::BoxIndicator { lo, hi } => {
                let inside = u.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| l <= v && v <= h);
                if inside {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            RegularizerSpec::Blocks { parts } => {
                let mut start = 0;
                let mut total = 0.0;
                for p in parts {
                    total += p.reg.value_slice(&u[start..start + p.len]);
                    start += p.len;
                }
                total
            }
        }
    }

    fn prox_slice(&self, u: &mut [f64], weight: f64) {
        match self {
            RegularizerSpec::Zero => {}
            RegularizerSpec::L1 { lambda } => {
                let t = weight * lambda;
                if t > 0.0 {
                    for v in u.iter_mut() {
                        *v = soft_threshold(*v, t);
                    }
                }
            }
            RegularizerSpec::BoxIndicator { lo, hi } => {
                for (v, (l, h)) in u.iter_mut().zip(lo.iter().zip(hi)) {
                    *v = v.clamp(*l, *h);
                }
            }
            RegularizerSpec::Blocks { parts } => {
                let mut start = 0;
                for p in parts {
                    p.reg.prox_slice(&mut u[start..start + p.len], weight);
                    start += p.len;
                }
            }
        }
    }
}

/// `argmin_v ½‖v − u‖² + weight·φ(v)`.
pub fn prox(reg: &RegularizerSpec, u: &Vector, weight: f64) -> Result<Vector> {
    if !(weight >= 0.0) {
        return Err(Error::param("weight", "must be nonnegative"));
    }
    let mut out = u.clone();
    reg.prox_slice(out.as_mut_slice(), weight);
    Ok(out)
}

/// `φ(u)`, `+∞` outside the domain.
pub fn reg_value(reg: &RegularizerSpec, u: &Vector) -> f64 {
    reg.value_slice(u.as_slice())
}

/// Squared distance from `u` to the domain of φ.
pub fn domain_dist_sq(reg: &RegularizerSpec, u: &[f64]) -> f64 {
    match reg {
        RegularizerSpec::Zero | RegularizerSpec::L1 { .. } => 0.0,
        RegularizerSpec::BoxIndicator { lo, hi } => u
            .iter()
            .zip(lo.iter().zip(hi))
            .map(|(v, (l, h))| (v - v.clamp(*l, *h)).powi(2))
            .sum(),
        RegularizerSpec::Blocks { parts } => {
            let mut start = 0;
            let mut total = 0.0;
            for p in parts {
                total += domain_dist_sq(&p.reg, &u[start..start + p.len]);
                start += p.len;
            }
            total
        }
    }
}

/// `argmin_v ½‖v − u‖² + weight·φ(v)` subject to `‖v − center‖ ≤ radius`.
///
/// Solved through the multiplier ν of the ball constraint: for fixed ν the
/// minimiser is `prox(φ, (u + νc)/(1 + ν), weight/(1 + ν))`, and its distance
/// to the center is nonincreasing in ν.
pub fn prox_in_ball(reg: &RegularizerSpec, u: &Vector, weight: f64, center: &Vector, radius: f64) -> Result<Vector> {
    Error::check_dim(u.len(), center.len())?;
    if !(weight >= 0.0) || !(radius >= 0.0) {
        return Err(Error::param("prox_in_ball", "need weight ≥ 0 and radius ≥ 0"));
    }
    if domain_dist_sq(reg, center.as_slice()) > radius * radius * (1.0 + 1e-12) {
        return Err(Error::param("prox_in_ball", "ball does not meet the domain of φ"));
    }
    let at = |nu: f64| -> Vector {
        let mut v = (u + center * nu) / (1.0 + nu);
        reg.prox_slice(v.as_mut_slice(), weight / (1.0 + nu));
        v
    };
    let inside = |v: &Vector| (v - center).norm() <= radius;
    let v0 = at(0.0);
    if inside(&v0) {
        return Ok(v0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while !inside(&at(hi)) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Ok(at(hi));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if inside(&at(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(at(hi))
}

/// Round index and step size that define `h_t = ½‖·‖² + tηφ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MirrorState {
    pub t: usize,
    pub eta: f64,
}

impl MirrorState {
    pub fn new(t: usize, eta: f64) -> Self {
        Self { t, eta }
    }

    /// Prox weight `tη` applied by `∇h_t*`.
    pub fn weight(&self) -> f64 {
        self.t as f64 * self.eta
    }
}

/// `∇h_t*(z) = prox(φ, z, tη)`; the identity when `t = 0` or `φ ≡ 0`.
pub fn mirror_map(ms: MirrorState, reg: &RegularizerSpec, z_dual: &Vector) -> Vector {
    if ms.t == 0 {
        return z_dual.clone();
    }
    let mut out = z_dual.clone();
    reg.prox_slice(out.as_mut_slice(), ms.weight().max(0.0));
    out
}
