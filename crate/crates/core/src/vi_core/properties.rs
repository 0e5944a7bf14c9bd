use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::operator::OperatorSpec;
use crate::error::{Error, Result};
use crate::linalg;
use crate::Vector;

/// Empirical constants measured on random pairs inside a ball.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    /// Pairs with `⟨V(z)−V(z'), z−z'⟩ < −tol`.
    pub monotone_violations: usize,
    /// Most negative normalised inner product seen, `⟨ΔV, Δz⟩ / ‖Δz‖²`.
    pub worst_monotone_margin: f64,
    pub measured_lipschitz: f64,
    /// `max ‖ΔV‖² / ⟨ΔV, Δz⟩`, or `+∞` if some pair has `ΔV ≠ 0` but no
    /// positive inner product.
    pub measured_cocoercivity: f64,
    pub measured_bound: f64,
    pub pairs_tested: usize,
}

/// Absolute tolerance for the monotonicity inner product on one pair.
pub const MONOTONE_TOL: f64 = 1e-10;

/// Sample `n_pairs` pairs uniformly in the ball of `domain_radius` around the
/// origin and measure monotonicity, smoothness, co-coercivity and the bound.
pub fn verify_properties(op: &OperatorSpec, n_pairs: usize, domain_radius: f64, seed: u64) -> Result<PropertyReport> {
    if n_pairs == 0 {
        return Err(Error::param("n_pairs", "must be at least 1"));
    }
    if !(domain_radius > 0.0) {
        return Err(Error::param("domain_radius", "must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let origin = Vector::zeros(op.dim());
    let mut report = PropertyReport {
        monotone_violations: 0,
        worst_monotone_margin: f64::INFINITY,
        measured_lipschitz: 0.0,
        measured_cocoercivity: 0.0,
        measured_bound: 0.0,
        pairs_tested: n_pairs,
    };
    for _ in 0..n_pairs {
        let z = linalg::uniform_in_ball(&mut rng, &origin, domain_radius);
        let zp = linalg::uniform_in_ball(&mut rng, &origin, domain_radius);
        let vz = op.apply(&z);
        let vzp = op.apply(&zp);
        report.measured_bound = report.measured_bound.max(vz.norm()).max(vzp.norm());
        let dz = &z - &zp;
        let dv = &vz - &vzp;
        let dz2 = dz.norm_squared();
        if dz2 == 0.0 {
            continue;
        }
        let inner = dv.dot(&dz);
        if inner < -MONOTONE_TOL {
            report.monotone_violations += 1;
        }
        report.worst_monotone_margin = report.worst_monotone_margin.min(inner / dz2);
        let dv2 = dv.norm_squared();
        report.measured_lipschitz = report.measured_lipschitz.max((dv2 / dz2).sqrt());
        if dv2 > 0.0 {
            if inner <= 1e-12 * dv2.sqrt() * dz2.sqrt() {
                report.measured_cocoercivity = f64::INFINITY;
            } else {
                report.measured_cocoercivity = report.measured_cocoercivity.max(dv2 / inner);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vi_core::operator::OperatorSpec;
    use crate::Matrix;

    #[test]
    fn skew_is_not_cocoercive() {
        // z = (1, 0), z' = 0: ‖ΔV‖² = 1 = ‖Δz‖² while ⟨ΔV, Δz⟩ = 0
        let j = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let op = OperatorSpec::skew(j).unwrap();
        let dz = Vector::from_column_slice(&[1.0, 0.0]);
        let dv = op.apply(&dz);
        assert_eq!(dv.norm_squared(), 1.0);
        assert_eq!(dv.dot(&dz), 0.0);
        let report = verify_properties(&op, 1_000, 2.0, 0).unwrap();
        assert!(report.measured_cocoercivity.is_infinite());
        assert_eq!(report.monotone_violations, 0);
        assert!((report.measured_lipschitz - 1.0).abs() < 1e-12);
    }

    #[test]
    fn monotone_affine_has_no_violations() {
        let a = Matrix::from_row_slice(3, 3, &[0.2, 1.0, 0.0, -1.0, 0.0, 0.5, 0.0, -0.5, 0.1]);
        let op = OperatorSpec::affine(a, Vector::zeros(3)).unwrap();
        let report = verify_properties(&op, 10_000, 10.0, 4).unwrap();
        assert_eq!(report.monotone_violations, 0);
        assert!(report.measured_lipschitz <= op.constants().lipschitz * (1.0 + 1e-6));
    }

    #[test]
    fn rejects_zero_pairs() {
        let op = OperatorSpec::affine(Matrix::identity(2, 2), Vector::zeros(2)).unwrap();
        assert!(verify_properties(&op, 0, 1.0, 0).is_err());
    }
}
