use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::vi_core::{OperatorKind, OperatorSpec};
use crate::{Matrix, Vector};

/// Number of sample points used when ξ is estimated.
pub const HETEROGENEITY_SAMPLES: usize = 1_000;

/// The mean operator `(1/M) Σ V_m`, available when every client operator is
/// affine or when all are shifts of one shared base.
pub fn mean_operator(ops: &[Arc<OperatorSpec>]) -> Result<OperatorSpec> {
    let first = ops
        .first()
        .ok_or_else(|| Error::param("oracles", "need at least one client"))?;
    let dim = first.dim();
    for op in ops {
        Error::check_dim(dim, op.dim())?;
    }
    let n = ops.len() as f64;

    let shared_base = ops
        .iter()
        .try_fold(None::<&Arc<OperatorSpec>>, |acc, op| match op.kind() {
            OperatorKind::Shifted { base, .. } => match acc {
                Some(b) if !Arc::ptr_eq(b, base) => Err(()),
                _ => Ok(Some(base)),
            },
            _ => Err(()),
        });
    if let Ok(Some(base)) = shared_base {
        let mut shift = Vector::zeros(dim);
        for op in ops {
            if let OperatorKind::Shifted { shift: s, .. } = op.kind() {
                shift += s;
            }
        }
        return OperatorSpec::shifted(base.clone(), shift / n);
    }

    let mut a = Matrix::zeros(dim, dim);
    let mut b = Vector::zeros(dim);
    for op in ops {
        let (am, bm) = op
            .affine_parts()
            .ok_or_else(|| Error::Unsupported("mean of non-affine client operators".into()))?;
        a += am;
        b += bm;
    }
    OperatorSpec::affine(a / n, b / n)
}

/// `ξ ≈ max_m max_z ‖V_m(z) − V(z)‖` over uniform points in the ball of
/// radius `10·D` around `center`.
pub fn estimate_heterogeneity(
    ops: &[Arc<OperatorSpec>],
    mean: &OperatorSpec,
    center: &Vector,
    radius: f64,
    seed: u64,
) -> Result<f64> {
    for op in ops {
        Error::check_dim(mean.dim(), op.dim())?;
    }
    Error::check_dim(mean.dim(), center.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xi: f64 = 0.0;
    for _ in 0..HETEROGENEITY_SAMPLES {
        let z = linalg::uniform_in_ball(&mut rng, center, 10.0 * radius);
        let v = mean.apply(&z);
        for op in ops {
            xi = xi.max((op.apply(&z) - &v).norm());
        }
    }
    Ok(xi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_offsets() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 1.0, -1.0, 0.0]);
        let offsets = [
            Vector::from_column_slice(&[1.0, 0.0]),
            Vector::from_column_slice(&[-1.0, 2.0]),
            Vector::from_column_slice(&[0.0, 1.0]),
        ];
        let ops: Vec<_> = offsets
            .iter()
            .map(|b| Arc::new(OperatorSpec::affine(a.clone(), b.clone()).unwrap()))
            .collect();
        let mean = mean_operator(&ops).unwrap();
        let b = Vector::from_column_slice(&[0.0, 1.0]);
        let (am, bm) = mean.affine_parts().unwrap();
        assert!((am - &a).norm() < 1e-15);
        assert!((bm - &b).norm() < 1e-15);
        let xi = estimate_heterogeneity(&ops, &mean, &Vector::zeros(2), 1.0, 3).unwrap();
        let expected = offsets.iter().map(|o| (o - &b).norm()).fold(0.0, f64::max);
        assert!((xi - expected).abs() < 1e-12);
    }

    #[test]
    fn shifted_clients_share_base() {
        let core = Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        let base = Arc::new(OperatorSpec::bounded_nonlinear(core, Vector::zeros(2), 1.0).unwrap());
        let ops: Vec<_> = [0.5, -0.5]
            .iter()
            .map(|&s| Arc::new(OperatorSpec::shifted(base.clone(), Vector::from_element(2, s)).unwrap()))
            .collect();
        let mean = mean_operator(&ops).unwrap();
        let z = Vector::from_column_slice(&[0.3, -1.0]);
        assert!((mean.apply(&z) - base.apply(&z)).norm() < 1e-15);
        let xi = estimate_heterogeneity(&ops, &mean, &Vector::zeros(2), 1.0, 0).unwrap();
        assert!((xi - 0.5 * 2f64.sqrt()).abs() < 1e-12);
    }
}
