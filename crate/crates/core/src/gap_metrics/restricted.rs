use super::ascent::{self, Objective};
use super::{GapEstimate, GapMethod, GapOptions};
use crate::error::{Error, Result};
use crate::linalg;
use crate::vi_core::OperatorSpec;
use crate::{Matrix, Vector};

pub(crate) fn check_ball(dim: usize, x_o: &Vector, center: &Vector, radius: f64) -> Result<()> {
    Error::check_dim(dim, x_o.len())?;
    Error::check_dim(dim, center.len())?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::param("D", "gap radius must be positive and finite"));
    }
    Ok(())
}

/// `⟨V(z), x_o − z⟩`.
pub(crate) fn gap_integrand(op: &OperatorSpec, x_o: &Vector, z: &Vector) -> f64 {
    op.apply(z).dot(&(x_o - z))
}

/// Gradient of the integrand, `J(z)ᵀ(x_o − z) − V(z)`.
pub(crate) fn gap_gradient(op: &OperatorSpec, x_o: &Vector, z: &Vector) -> Vector {
    op.jacobian(z).tr_mul(&(x_o - z)) - op.apply(z)
}

/// Maximise `−wᵀSw + pᵀw` over `‖w‖ ≤ D` for symmetric PSD `S`.
///
/// In the eigenbasis of `S` the maximiser is `ŵᵢ = p̂ᵢ / (2(λᵢ + μ))` with the
/// multiplier μ ≥ 0 found by bisection on `‖ŵ(μ)‖ = D`. Returns the maximiser
/// and the Lagrangian dual bound at the returned μ.
pub(crate) fn concave_trust_region(s: &Matrix, p: &Vector, radius: f64) -> (Vector, f64) {
    let (values, vectors) = linalg::sorted_eigen(s);
    let lambdas: Vec<f64> = values.iter().map(|l| l.max(0.0)).collect();
    let p_hat = vectors.tr_mul(p);
    let w_hat = |mu: f64| -> Vector {
        Vector::from_iterator(
            p_hat.len(),
            p_hat
                .iter()
                .zip(&lambdas)
                .map(|(&pi, &li)| if pi == 0.0 { 0.0 } else { pi / (2.0 * (li + mu)) }),
        )
    };
    let dual = |mu: f64| -> f64 {
        p_hat
            .iter()
            .zip(&lambdas)
            .map(|(&pi, &li)| if pi == 0.0 { 0.0 } else { pi * pi / (4.0 * (li + mu)) })
            .sum::<f64>()
            + mu * radius * radius
    };
    let p_norm = p.norm();
    if p_norm == 0.0 {
        return (Vector::zeros(p.len()), 0.0);
    }
    let unconstrained = w_hat(0.0);
    if unconstrained.iter().all(|v| v.is_finite()) && unconstrained.norm() <= radius {
        let value = unconstrained
            .iter()
            .zip(p_hat.iter().zip(&lambdas))
            .map(|(w, (p, l))| p * w - l * w * w)
            .sum();
        return (&vectors * unconstrained, value);
    }
    let mut lo = 0.0;
    let mut hi = p_norm / (2.0 * radius);
    for _ in 0..500 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if w_hat(mid).norm() <= radius {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (&vectors * w_hat(hi), dual(hi))
}

fn exact_affine(op: &OperatorSpec, a: &Matrix, b: &Vector, x_o: &Vector, center: &Vector, radius: f64) -> GapEstimate {
    let s = linalg::sym_part(a);
    // g(c + w) = g(c) − wᵀSw + pᵀw with p = Aᵀx_o − b − 2Sc
    let p = a.tr_mul(x_o) - b - (&s * center) * 2.0;
    let (w, dual) = concave_trust_region(&s, &p, radius);
    let maximizer = center + w;
    let value = gap_integrand(op, x_o, &maximizer);
    let dual_bound = gap_integrand(op, x_o, center) + dual;
    GapEstimate {
        value,
        method: GapMethod::ExactConcave,
        certified: true,
        maximizer,
        duality_gap: Some((dual_bound - value).max(0.0)),
    }
}

/// Local Lipschitz estimate of the integrand's gradient on the ball.
pub(crate) fn ascent_lipschitz(op: &OperatorSpec, x_o: &Vector, center: &Vector, radius: f64) -> f64 {
    let c = op.constants();
    let curvature = if c.second_order.is_finite() {
        c.second_order * ((x_o - center).norm() + radius)
    } else {
        c.lipschitz
    };
    (2.0 * c.lipschitz + curvature).max(1e-12)
}

pub fn restricted_gap(
    op: &OperatorSpec,
    x_o: &Vector,
    center: &Vector,
    radius: f64,
    method: GapMethod,
) -> Result<GapEstimate> {
    restricted_gap_with(op, x_o, center, radius, &GapOptions::with_method(method))
}

/// `err(x_o) = sup_{‖z − center‖ ≤ D} ⟨V(z), x_o − z⟩`.
pub fn restricted_gap_with(
    op: &OperatorSpec,
    x_o: &Vector,
    center: &Vector,
    radius: f64,
    opts: &GapOptions,
) -> Result<GapEstimate> {
    check_ball(op.dim(), x_o, center, radius)?;
    let parts = op.affine_parts();
    let method = match (opts.method, &parts) {
        (GapMethod::Auto, Some(_)) => GapMethod::ExactConcave,
        (GapMethod::Auto, None) => GapMethod::MultistartAscent,
        (GapMethod::ExactConcave, None) => {
            return Err(Error::Unsupported("exact concave gap needs an affine operator".into()))
        }
        (m, _) => m,
    };
    let value = |z: &Vector| gap_integrand(op, x_o, z);
    match method {
        GapMethod::ExactConcave => {
            let (a, b) = parts.expect("checked above");
            Ok(exact_affine(op, &a, &b, x_o, center, radius))
        }
        GapMethod::Grid => {
            let (v, z) = ascent::grid(&value, center, radius, opts.grid_resolution)?;
            Ok(GapEstimate {
                value: v,
                method,
                certified: true,
                maximizer: z,
                duality_gap: None,
            })
        }
        _ => {
            if opts.starts == 0 {
                return Err(Error::param("starts", "need at least one start"));
            }
            let grad = |z: &Vector| gap_gradient(op, x_o, z);
            let prox = |u: &Vector, _: f64| linalg::project_ball(u, center, radius);
            let obj = Objective {
                value: &value,
                grad: &grad,
                prox: &prox,
            };
            let starts = ascent::starts(&obj, center, radius, x_o, opts.starts, opts.seed);
            let step = 1.0 / (2.0 * ascent_lipschitz(op, x_o, center, radius));
            let (v, z) = ascent::multistart(&obj, starts, step, opts.ascent_iterations);
            Ok(GapEstimate {
                value: v,
                method: GapMethod::MultistartAscent,
                certified: false,
                maximizer: z,
                duality_gap: None,
            })
        }
    }
}
