use super::ascent::{self, Objective};
use super::restricted::{ascent_lipschitz, check_ball, gap_gradient, gap_integrand, restricted_gap_with};
use super::{GapEstimate, GapMethod, GapOptions};
use crate::error::{Error, Result};
use crate::linalg;
use crate::prox_mirror::{domain_dist_sq, prox_in_ball, reg_value, RegularizerSpec};
use crate::vi_core::OperatorSpec;
use crate::Vector;

const FISTA_MAX_ITER: usize = 50_000;

pub fn composite_gap(
    op: &OperatorSpec,
    reg: &RegularizerSpec,
    v_o: &Vector,
    center: &Vector,
    radius: f64,
) -> Result<GapEstimate> {
    composite_gap_with(op, reg, v_o, center, radius, &GapOptions::default())
}

/// `err_c(v_o) = sup ⟨V(z), v_o − z⟩ + φ(v_o) − φ(z)` over the ball
/// `‖z − center‖ ≤ D` intersected with the domain of φ.
pub fn composite_gap_with(
    op: &OperatorSpec,
    reg: &RegularizerSpec,
    v_o: &Vector,
    center: &Vector,
    radius: f64,
    opts: &GapOptions,
) -> Result<GapEstimate> {
    check_ball(op.dim(), v_o, center, radius)?;
    reg.validate(op.dim())?;
    if reg.is_zero() {
        return restricted_gap_with(op, v_o, center, radius, opts);
    }
    if domain_dist_sq(reg, center.as_slice()) > radius * radius {
        return Err(Error::param("regularizer", "φ is +∞ on the whole gap ball"));
    }
    let phi_o = reg_value(reg, v_o);
    let value = |z: &Vector| gap_integrand(op, v_o, z) + phi_o - reg_value(reg, z);
    let prox = |u: &Vector, tau: f64| prox_in_ball(reg, u, tau, center, radius).expect("ball meets the domain");

    let parts = op.affine_parts();
    let method = match (opts.method, &parts) {
        (GapMethod::Auto, Some(_)) => GapMethod::ExactConcave,
        (GapMethod::Auto, None) => GapMethod::MultistartAscent,
        (GapMethod::ExactConcave, None) => {
            return Err(Error::Unsupported("exact concave gap needs an affine operator".into()))
        }
        (m, _) => m,
    };
    let estimate = |v: f64, z: Vector, method, certified| GapEstimate {
        value: v,
        method,
        certified,
        maximizer: z,
        duality_gap: None,
    };
    match method {
        GapMethod::ExactConcave => {
            let (a, b) = parts.expect("checked above");
            let s = linalg::sym_part(&a);
            let q = a.tr_mul(v_o) - &b;
            // smooth part −zᵀSz + qᵀz has a 2λ_max(S)-Lipschitz gradient
            let smooth = (2.0 * linalg::max_eigenvalue(&s))
                .max(1e-2 * linalg::spectral_norm(&a))
                .max(1e-12);
            let grad = |z: &Vector| &q - (&s * z) * 2.0;
            let obj = Objective {
                value: &value,
                grad: &grad,
                prox: &prox,
            };
            let start = prox(&linalg::project_ball(v_o, center, radius), 0.0);
            let (_, z) = ascent::fista(&obj, start, 1.0 / smooth, FISTA_MAX_ITER, 1e-15 * (1.0 + radius));
            Ok(estimate(value(&z), z, GapMethod::ExactConcave, true))
        }
        GapMethod::Grid => {
            let (v, z) = ascent::grid(&value, center, radius, opts.grid_resolution)?;
            Ok(estimate(v, z, GapMethod::Grid, true))
        }
        _ => {
            if opts.starts == 0 {
                return Err(Error::param("starts", "need at least one start"));
            }
            let grad = |z: &Vector| gap_gradient(op, v_o, z);
            let obj = Objective {
                value: &value,
                grad: &grad,
                prox: &prox,
            };
            let starts = ascent::starts(&obj, center, radius, v_o, opts.starts, opts.seed);
            let step = 1.0 / (2.0 * ascent_lipschitz(op, v_o, center, radius));
            let (v, z) = ascent::multistart(&obj, starts, step, opts.ascent_iterations);
            Ok(estimate(v, z, GapMethod::MultistartAscent, false))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gap_metrics::restricted_gap;
    use crate::prox_mirror::RegularizerBlock;
    use crate::Matrix;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn zero_regularizer_reduces_to_restricted_gap() {
        let op = OperatorSpec::affine(Matrix::from_row_slice(2, 2, &[0.2, 1.0, -1.0, 0.3]), v(&[0.1, 0.2])).unwrap();
        let x_o = v(&[0.3, -0.8]);
        let c = v(&[0.0, 0.1]);
        let a = composite_gap(&op, &RegularizerSpec::Zero, &x_o, &c, 1.0).unwrap();
        let b = restricted_gap(&op, &x_o, &c, 1.0, GapMethod::Auto).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_operator_with_l1() {
        let op = OperatorSpec::affine(Matrix::zeros(2, 2), Vector::zeros(2)).unwrap();
        let reg = RegularizerSpec::L1 { lambda: 1.0 };
        let g = composite_gap(&op, &reg, &v(&[0.5, 0.0]), &Vector::zeros(2), 1.0).unwrap();
        assert!((g.value - 0.5).abs() < 1e-12);
        let grid = composite_gap_with(
            &op,
            &reg,
            &v(&[0.5, 0.0]),
            &Vector::zeros(2),
            1.0,
            &GapOptions::with_method(GapMethod::Grid),
        )
        .unwrap();
        assert!((grid.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn solution_of_box_constrained_bilinear_has_small_gap() {
        // min_x max_y x·y + c x − d y on the box [−1, 1]² with c=0.5, d=0.2:
        // saddle x* = 0.2, y* = −0.5 lies inside the box.
        let b = Matrix::from_row_slice(1, 1, &[1.0]);
        let op = OperatorSpec::bilinear_saddle(b, v(&[0.5]), v(&[0.2])).unwrap();
        let z_star = op.solution().unwrap().clone();
        assert!((&z_star - v(&[0.2, -0.5])).norm() < 1e-12);
        let reg = RegularizerSpec::Blocks {
            parts: vec![
                RegularizerBlock {
                    len: 1,
                    reg: RegularizerSpec::BoxIndicator {
                        lo: vec![-1.0],
                        hi: vec![1.0],
                    },
                },
                RegularizerBlock {
                    len: 1,
                    reg: RegularizerSpec::BoxIndicator {
                        lo: vec![-1.0],
                        hi: vec![1.0],
                    },
                },
            ],
        };
        let g = composite_gap(&op, &reg, &z_star, &Vector::zeros(2), 1.0).unwrap();
        assert!(g.value.abs() <= 1e-6, "{}", g.value);
        let off = composite_gap(&op, &reg, &v(&[0.9, 0.9]), &Vector::zeros(2), 1.0).unwrap();
        assert!(off.value > 0.1);
        let grid = composite_gap_with(
            &op,
            &reg,
            &v(&[0.9, 0.9]),
            &Vector::zeros(2),
            1.0,
            &GapOptions::with_method(GapMethod::Grid),
        )
        .unwrap();
        assert!((off.value - grid.value).abs() < 1e-3);
        assert!(off.value >= grid.value - 1e-9);
    }

    #[test]
    fn l1_bilinear_matches_grid() {
        let b = Matrix::from_row_slice(1, 1, &[1.5]);
        let op = OperatorSpec::bilinear_saddle(b, v(&[0.3]), v(&[-0.4])).unwrap();
        let reg = RegularizerSpec::L1 { lambda: 0.25 };
        let v_o = v(&[0.6, -0.2]);
        let c = v(&[0.1, 0.0]);
        let exact = composite_gap(&op, &reg, &v_o, &c, 0.8).unwrap();
        let grid = composite_gap_with(&op, &reg, &v_o, &c, 0.8, &GapOptions::with_method(GapMethod::Grid)).unwrap();
        assert!(exact.value >= grid.value - 1e-9);
        assert!(exact.value - grid.value < 1e-3);
        assert!((&exact.maximizer - &c).norm() <= 0.8 * (1.0 + 1e-9));
    }

    #[test]
    fn disjoint_domain_rejected() {
        let op = OperatorSpec::affine(Matrix::identity(1, 1), Vector::zeros(1)).unwrap();
        let reg = RegularizerSpec::BoxIndicator {
            lo: vec![3.0],
            hi: vec![4.0],
        };
        assert!(composite_gap(&op, &reg, &v(&[3.5]), &v(&[0.0]), 1.0).is_err());
    }

    #[test]
    fn nonlinear_ascent_lower_bounds_grid() {
        let op = OperatorSpec::bounded_nonlinear(
            Matrix::from_row_slice(2, 2, &[1.0, 0.3, -0.2, 1.0]),
            v(&[0.1, 0.0]),
            1.0,
        )
        .unwrap();
        let reg = RegularizerSpec::L1 { lambda: 0.3 };
        let v_o = v(&[0.5, 0.5]);
        let asc = composite_gap(&op, &reg, &v_o, &Vector::zeros(2), 1.0).unwrap();
        assert!(!asc.certified);
        let grid = composite_gap_with(
            &op,
            &reg,
            &v_o,
            &Vector::zeros(2),
            1.0,
            &GapOptions {
                method: GapMethod::Grid,
                grid_resolution: 400,
                ..GapOptions::default()
            },
        )
        .unwrap();
        assert!((asc.value - grid.value).abs() < 1e-2);
    }
}
