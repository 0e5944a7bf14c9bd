use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::vi_core::OperatorSpec;
use crate::{Matrix, Vector};

/// Exact proximal point `x* = (I + ηA)⁻¹(z − ηb)`, the solution of
/// `x* = z − ηV(x*)` for affine `V`.
pub fn exact_prox_point(op: &OperatorSpec, z: &Vector, eta: f64) -> Result<Vector> {
    Error::check_dim(op.dim(), z.len())?;
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::param("eta", "must be positive and finite"));
    }
    let (a, b) = op.affine_parts().ok_or_else(|| {
        Error::Unsupported("exact proximal point needs an affine operator; use solve_inner_prox".into())
    })?;
    let n = op.dim();
    let lhs = Matrix::identity(n, n) + a * eta;
    lhs.lu()
        .solve(&(z - b * eta))
        .ok_or_else(|| Error::param("eta", "I + ηA is singular"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EgCocoercivityReport {
    pub pairs: usize,
    /// Pairs whose normalised violation exceeds `1e-9`.
    pub violations: usize,
    /// Largest `(‖ΔF‖² − (2/η)⟨ΔF, Δz⟩) / ‖Δz‖²` seen.
    pub max_violation: f64,
}

/// Check that the extra-gradient operator `F(z) = V(z − ηV(z))` is
/// `2/η`-co-coercive on random pairs from the unit ball.
pub fn check_eg_cocoercivity(op: &OperatorSpec, eta: f64, n_pairs: usize, seed: u64) -> Result<EgCocoercivityReport> {
    if !op.is_affine() {
        return Err(Error::Unsupported(
            "co-coercivity check needs an affine operator".into(),
        ));
    }
    let l = op.constants().lipschitz;
    if !(eta > 0.0) || eta * l > 1.0 + 1e-12 {
        return Err(Error::param("eta", format!("need 0 < η ≤ 1/L = {}", 1.0 / l)));
    }
    if n_pairs == 0 {
        return Err(Error::param("n_pairs", "must be at least 1"));
    }
    let f = |z: &Vector| op.apply(&(z - op.apply(z) * eta));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let origin = Vector::zeros(op.dim());
    let mut report = EgCocoercivityReport {
        pairs: n_pairs,
        violations: 0,
        max_violation: f64::NEG_INFINITY,
    };
    for _ in 0..n_pairs {
        let z = linalg::uniform_in_ball(&mut rng, &origin, 1.0);
        let zp = linalg::uniform_in_ball(&mut rng, &origin, 1.0);
        let dz = &z - &zp;
        let dz2 = dz.norm_squared();
        if dz2 == 0.0 {
            continue;
        }
        let df = f(&z) - f(&zp);
        let violation = (df.norm_squared() - (2.0 / eta) * df.dot(&dz)) / dz2;
        if violation > 1e-9 {
            report.violations += 1;
        }
        report.max_violation = report.max_violation.max(violation);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vi_core::{make_test_problem, ProblemKind, ProblemParams};

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn prox_point_examples() {
        let zero = OperatorSpec::affine(Matrix::zeros(2, 2), Vector::zeros(2)).unwrap();
        assert_eq!(exact_prox_point(&zero, &v(&[1.0, -3.0]), 0.7).unwrap(), v(&[1.0, -3.0]));
        let id = OperatorSpec::affine(Matrix::identity(2, 2), Vector::zeros(2)).unwrap();
        let x = exact_prox_point(&id, &v(&[2.0, 2.0]), 1.0).unwrap();
        assert!((x - v(&[1.0, 1.0])).norm() < 1e-15);
    }

    #[test]
    fn prox_point_residual_on_random_problems() {
        let op = make_test_problem(ProblemKind::Affine, 6, &ProblemParams::default(), 11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let z = linalg::gaussian_vector(&mut rng, 6) * 3.0;
            let x = exact_prox_point(&op, &z, 0.8).unwrap();
            let residual = (&x + op.apply(&x) * 0.8 - &z).norm();
            assert!(residual <= 1e-10 * (1.0 + z.norm()));
        }
    }

    #[test]
    fn prox_point_rejects_nonlinear() {
        let op = OperatorSpec::bounded_nonlinear(Matrix::identity(2, 2), Vector::zeros(2), 1.0).unwrap();
        assert!(exact_prox_point(&op, &Vector::zeros(2), 1.0).is_err());
    }

    #[test]
    fn eg_identity_degenerate() {
        let id = OperatorSpec::affine(Matrix::identity(3, 3), Vector::zeros(3)).unwrap();
        let r = check_eg_cocoercivity(&id, 1.0, 100, 0).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.max_violation.abs() < 1e-12);
    }

    #[test]
    fn eg_skew_and_random() {
        let skew = OperatorSpec::skew(Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])).unwrap();
        let r = check_eg_cocoercivity(&skew, 1.0, 10_000, 1).unwrap();
        assert!(r.max_violation <= 1e-9);
        let op = make_test_problem(ProblemKind::Affine, 5, &ProblemParams::default(), 3).unwrap();
        let l = op.constants().lipschitz;
        let r = check_eg_cocoercivity(&op, 0.5 / l, 2_000, 2).unwrap();
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn eg_rejects_large_step() {
        let id = OperatorSpec::affine(Matrix::identity(2, 2) * 2.0, Vector::zeros(2)).unwrap();
        assert!(check_eg_cocoercivity(&id, 0.6, 10, 0).is_err());
    }
}
