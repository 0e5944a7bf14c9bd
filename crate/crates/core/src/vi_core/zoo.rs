//! Synthetic problem zoo covering the assumption classes the algorithms need:
//! monotone affine, bilinear saddle, skew, co-coercive gradient fields and a
//! bounded (saturating) nonlinear operator.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::operator::{OperatorSpec, ProblemKind};
use crate::error::{Error, Result};
use crate::linalg;
use crate::{Matrix, Vector};

/// Kind-specific knobs for [`make_test_problem`]. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemParams {
    /// Target smoothness constant L (default 1).
    pub lipschitz: Option<f64>,
    /// Rank of the symmetric part of a random affine operator (default ⌊d/2⌋).
    pub sym_rank: Option<usize>,
    /// Relative weight of the symmetric part before rescaling (default 1).
    pub sym_weight: Option<f64>,
    /// Relative weight of the skew part before rescaling (default 1).
    pub skew_weight: Option<f64>,
    /// Norm of the planted solution (default 0.5).
    pub solution_radius: Option<f64>,
    /// Hessian spectrum `[lo, hi]` for quadratic-gradient problems (default `[0, L]`).
    pub eig_range: Option<[f64; 2]>,
    /// Requested co-coercivity constant β; rejected when unattainable.
    pub cocoercivity: Option<f64>,
    /// Explicit coupling matrix for bilinear saddles, row-major.
    pub coupling: Option<Vec<Vec<f64>>>,
    /// Explicit stacked linear terms `(c, d)` for bilinear saddles.
    pub offsets: Option<Vec<f64>>,
    /// Base kind for `regularized` problems (default affine).
    pub base_kind: Option<ProblemKind>,
    /// Proximal parameter η for `regularized` problems (default 1).
    pub eta: Option<f64>,
    /// Regularization center for `regularized` problems (default origin).
    pub center: Option<Vec<f64>>,
}

fn positive(name: &str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::param(name, format!("must be positive and finite, got {value}")))
    }
}

fn planted_solution(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vector {
    if radius == 0.0 {
        Vector::zeros(dim)
    } else {
        linalg::unit_direction(rng, dim) * radius
    }
}

fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<Matrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::param("coupling", "ragged or empty matrix"));
    }
    Ok(Matrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// Build a named problem from the zoo. Constants are exact (from spectra) for
/// affine, skew, bilinear and quadratic kinds and conservative for the bounded
/// nonlinear kind.
pub fn make_test_problem(kind: ProblemKind, dim: usize, params: &ProblemParams, seed: u64) -> Result<OperatorSpec> {
    if dim == 0 {
        return Err(Error::param("dim", "must be positive"));
    }
    let lipschitz = positive("lipschitz", params.lipschitz.unwrap_or(1.0))?;
    let radius = params.solution_radius.unwrap_or(0.5);
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(Error::param("solution_radius", "must be finite and nonnegative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    if let Some(beta) = params.cocoercivity {
        match kind {
            ProblemKind::QuadraticGradient | ProblemKind::BoundedNonlinear if beta < lipschitz => {
                return Err(Error::param(
                    "cocoercivity",
                    format!("β = {beta} < L = {lipschitz} is unattainable for a gradient field"),
                ));
            }
            ProblemKind::Skew | ProblemKind::BilinearSaddle if beta.is_finite() => {
                return Err(Error::param(
                    "cocoercivity",
                    "skew and bilinear operators are not co-coercive",
                ));
            }
            _ => {}
        }
    }

    let op = match kind {
        ProblemKind::Affine => {
            let rank = params.sym_rank.unwrap_or(dim / 2).min(dim);
            let sym_weight = params.sym_weight.unwrap_or(1.0);
            let skew_weight = params.skew_weight.unwrap_or(1.0);
            if sym_weight < 0.0 || skew_weight < 0.0 {
                return Err(Error::param("sym_weight/skew_weight", "must be nonnegative"));
            }
            let mut a = Matrix::zeros(dim, dim);
            if rank > 0 && sym_weight > 0.0 {
                let p = linalg::gaussian_matrix(&mut rng, dim, rank);
                let s = &p * p.transpose();
                a += s.clone() * (sym_weight / linalg::spectral_norm(&s));
            }
            if dim > 1 && skew_weight > 0.0 {
                let g = linalg::gaussian_matrix(&mut rng, dim, dim);
                let j = &g - g.transpose();
                a += j.clone() * (skew_weight / linalg::spectral_norm(&j));
            }
            let norm = linalg::spectral_norm(&a);
            if norm == 0.0 {
                return Err(Error::param("affine", "both parts vanish; nothing to scale to L"));
            }
            a *= lipschitz / norm;
            let solution = planted_solution(&mut rng, dim, radius);
            let b = -(&a * &solution);
            OperatorSpec::affine(a, b)?.with_solution(solution)?
        }
        ProblemKind::BilinearSaddle => {
            let (coupling, n, p) = match &params.coupling {
                Some(rows) => {
                    let b = rows_to_matrix(rows)?;
                    let (n, p) = b.shape();
                    Error::check_dim(dim, n + p)?;
                    (b, n, p)
                }
                None => {
                    if !dim.is_multiple_of(2) {
                        return Err(Error::param("dim", "bilinear saddle needs an even dimension"));
                    }
                    let n = dim / 2;
                    let g = linalg::gaussian_matrix(&mut rng, n, n);
                    let scale = lipschitz / linalg::spectral_norm(&g);
                    (g * scale, n, n)
                }
            };
            let (c, d) = match &params.offsets {
                Some(off) => {
                    Error::check_dim(dim, off.len())?;
                    (
                        Vector::from_column_slice(&off[..n]),
                        Vector::from_column_slice(&off[n..]),
                    )
                }
                None => {
                    let sol = planted_solution(&mut rng, n + p, radius);
                    let x = sol.rows(0, n).into_owned();
                    let y = sol.rows(n, p).into_owned();
                    (-(&coupling * y), coupling.transpose() * x)
                }
            };
            OperatorSpec::bilinear_saddle(coupling, c, d)?
        }
        ProblemKind::Skew => {
            let mut j = Matrix::zeros(dim, dim);
            for k in (0..dim.saturating_sub(1)).step_by(2) {
                j[(k, k + 1)] = lipschitz;
                j[(k + 1, k)] = -lipschitz;
            }
            let op = OperatorSpec::skew(j)?;
            let mut constants = *op.constants();
            if dim > 1 {
                // each block is a scaled rotation, so ‖J‖ = L exactly
                constants.lipschitz = lipschitz;
            }
            op.with_constants(constants)
        }
        ProblemKind::QuadraticGradient => {
            let [lo, hi] = params.eig_range.unwrap_or([0.0, lipschitz]);
            if !(0.0 <= lo && lo <= hi && hi > 0.0 && hi.is_finite()) {
                return Err(Error::param("eig_range", "need 0 ≤ lo ≤ hi, hi > 0"));
            }
            let q = linalg::random_orthogonal(&mut rng, dim);
            let eigs = Vector::from_iterator(
                dim,
                (0..dim).map(|i| {
                    if dim == 1 {
                        hi
                    } else {
                        lo + (hi - lo) * i as f64 / (dim - 1) as f64
                    }
                }),
            );
            let h = &q * Matrix::from_diagonal(&eigs) * q.transpose();
            let h = linalg::sym_part(&h);
            let solution = planted_solution(&mut rng, dim, radius);
            let b = -(&h * &solution);
            let op = OperatorSpec::quadratic_gradient(h, b)?.with_solution(solution)?;
            // the spectrum is known exactly; do not rely on the floating-point eigensolver
            let mut c = *op.constants();
            c.lipschitz = hi;
            c.cocoercivity = hi;
            c.strong_monotonicity = lo;
            op.with_constants(c)
        }
        ProblemKind::BoundedNonlinear => {
            let g = linalg::gaussian_matrix(&mut rng, dim, dim);
            let core = &g / linalg::spectral_norm(&g);
            let solution = planted_solution(&mut rng, dim, radius);
            let offset = -(&core * &solution);
            OperatorSpec::bounded_nonlinear(core, offset, lipschitz)?.with_solution(solution)?
        }
        ProblemKind::Regularized => {
            let base_kind = params.base_kind.unwrap_or(ProblemKind::Affine);
            if base_kind == ProblemKind::Regularized {
                return Err(Error::param("base_kind", "cannot nest regularized problems"));
            }
            let eta = positive("eta", params.eta.unwrap_or(1.0))?;
            let center = match &params.center {
                Some(c) => {
                    Error::check_dim(dim, c.len())?;
                    Vector::from_column_slice(c)
                }
                None => Vector::zeros(dim),
            };
            let base = make_test_problem(base_kind, dim, params, seed)?;
            OperatorSpec::regularized(Arc::new(base), center, eta)?
        }
    };
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vi_core::properties::verify_properties;

    #[test]
    fn skew_2d_matches_rule() {
        let op = make_test_problem(ProblemKind::Skew, 2, &ProblemParams::default(), 0).unwrap();
        assert_eq!(op.constants().lipschitz, 1.0);
        let z = Vector::from_column_slice(&[3.0, 0.0]);
        assert_eq!(op.apply(&z), Vector::from_column_slice(&[0.0, -3.0]));
        for z in [
            Vector::from_column_slice(&[1.0, 2.0]),
            Vector::from_column_slice(&[-4.0, 0.5]),
        ] {
            assert_eq!(op.apply(&z).dot(&z), 0.0);
        }
    }

    #[test]
    fn bilinear_identity_has_origin_saddle() {
        let params = ProblemParams {
            coupling: Some(vec![vec![1.0]]),
            offsets: Some(vec![0.0, 0.0]),
            ..Default::default()
        };
        let op = make_test_problem(ProblemKind::BilinearSaddle, 2, &params, 0).unwrap();
        assert_eq!(op.solution().unwrap(), &Vector::zeros(2));
    }

    #[test]
    fn random_bilinear_solution_is_zero_of_operator() {
        let op = make_test_problem(ProblemKind::BilinearSaddle, 8, &ProblemParams::default(), 3).unwrap();
        let sol = op.solution().unwrap();
        assert!(op.apply(sol).norm() < 1e-10);
        assert!((op.constants().lipschitz - 1.0).abs() < 1e-12);
    }

    #[test]
    fn affine_zoo_is_monotone_with_exact_constants() {
        for seed in 0..5 {
            let op = make_test_problem(ProblemKind::Affine, 6, &ProblemParams::default(), seed).unwrap();
            let (a, _) = op.affine_parts().unwrap();
            assert!(linalg::min_eigenvalue(&linalg::sym_part(&a)) > -1e-12);
            assert!((op.constants().lipschitz - 1.0).abs() < 1e-12);
            assert!(op.apply(op.solution().unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn quadratic_measured_constants() {
        let params = ProblemParams {
            eig_range: Some([0.1, 1.0]),
            ..Default::default()
        };
        let op = make_test_problem(ProblemKind::QuadraticGradient, 2, &params, 11).unwrap();
        let report = verify_properties(&op, 10_000, 5.0, 1).unwrap();
        assert!(report.measured_lipschitz >= 0.99 && report.measured_lipschitz <= 1.01);
        assert!(report.measured_cocoercivity <= 1.0 + 1e-9);
        assert!(report.measured_cocoercivity >= 0.99);
        assert_eq!(report.monotone_violations, 0);
    }

    #[test]
    fn unsatisfiable_cocoercivity_is_rejected() {
        let params = ProblemParams {
            cocoercivity: Some(0.5),
            ..Default::default()
        };
        assert!(make_test_problem(ProblemKind::QuadraticGradient, 3, &params, 0).is_err());
        let params = ProblemParams {
            cocoercivity: Some(10.0),
            ..Default::default()
        };
        assert!(make_test_problem(ProblemKind::Skew, 2, &params, 0).is_err());
    }

    #[test]
    fn bounded_nonlinear_solution_and_bound() {
        let op = make_test_problem(ProblemKind::BoundedNonlinear, 4, &ProblemParams::default(), 5).unwrap();
        assert!(op.apply(op.solution().unwrap()).norm() < 1e-12);
        assert!(op.constants().bound.is_finite());
        assert!(op.constants().second_order.is_finite());
    }

    #[test]
    fn regularized_zoo_problem() {
        let params = ProblemParams {
            eta: Some(0.5),
            ..Default::default()
        };
        let op = make_test_problem(ProblemKind::Regularized, 4, &params, 2).unwrap();
        assert!((op.constants().strong_monotonicity - 2.0).abs() < 1e-9);
    }

    #[test]
    fn zero_dim_rejected() {
        assert!(make_test_problem(ProblemKind::Affine, 0, &ProblemParams::default(), 0).is_err());
    }
}
