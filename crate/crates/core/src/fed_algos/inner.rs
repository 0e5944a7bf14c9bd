use crate::error::{Error, Result};
use crate::vi_core::{DrawPath, OracleSpec, RngStream};
use crate::Vector;

/// Run `steps` inner iterations `x ← x − γ(Ṽ(x) + (x − z)/η)` from `x = z`,
/// calling `visit` on every iterate including the start. Inner step ℓ draws
/// from `stream` at inner index ℓ.
pub(crate) fn inner_loop(
    oracle: &OracleSpec,
    z: &Vector,
    eta: f64,
    gamma: f64,
    steps: usize,
    stream: &RngStream,
    mut visit: impl FnMut(&Vector),
) -> Vector {
    let mut x = z.clone();
    visit(&x);
    let base = stream.path;
    for l in 1..=steps {
        let path = DrawPath {
            inner: l as u64,
            counter: 0,
            ..base
        };
        let v = oracle.sample_unchecked(&x, &stream.at(path));
        let mut step = &x - z;
        step /= eta;
        step += v;
        x.axpy(-gamma, &step, 1.0);
        visit(&x);
    }
    x
}

fn check(oracle: &OracleSpec, z: &Vector, eta: f64, gamma: f64, steps: usize) -> Result<()> {
    Error::check_dim(oracle.dim(), z.len())?;
    if !(eta > 0.0) || !(gamma > 0.0) {
        return Err(Error::param("eta/gamma", "must be positive"));
    }
    if steps == 0 {
        return Err(Error::param("H", "need at least one inner step"));
    }
    Ok(())
}

/// Approximate the proximal point `x* = argzero V(x) + (x − z)/η` with `steps`
/// stochastic inner steps; returns the last iterate.
pub fn solve_inner_prox(
    oracle: &OracleSpec,
    z: &Vector,
    eta: f64,
    gamma: f64,
    steps: usize,
    stream: &RngStream,
) -> Result<Vector> {
    check(oracle, z, eta, gamma, steps)?;
    Ok(inner_loop(oracle, z, eta, gamma, steps, stream, |_| {}))
}

/// Like [`solve_inner_prox`] but returns all `steps + 1` iterates.
pub fn inner_prox_path(
    oracle: &OracleSpec,
    z: &Vector,
    eta: f64,
    gamma: f64,
    steps: usize,
    stream: &RngStream,
) -> Result<Vec<Vector>> {
    check(oracle, z, eta, gamma, steps)?;
    let mut path = Vec::with_capacity(steps + 1);
    inner_loop(oracle, z, eta, gamma, steps, stream, |x| path.push(x.clone()));
    Ok(path)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fed_algos::step_size::inner_step;
    use crate::vi_core::OperatorSpec;
    use crate::Matrix;

    fn exact_prox(a: &Matrix, b: &Vector, z: &Vector, eta: f64) -> Vector {
        let n = a.nrows();
        let lhs = Matrix::identity(n, n) + a * eta;
        lhs.lu().solve(&(z - b * eta)).unwrap()
    }

    #[test]
    fn zero_operator_returns_anchor() {
        let op = Arc::new(OperatorSpec::affine(Matrix::zeros(3, 3), Vector::zeros(3)).unwrap());
        let z = Vector::from_column_slice(&[1.0, -2.0, 0.5]);
        let x = solve_inner_prox(&OracleSpec::exact(op), &z, 0.3, 0.1, 1, &RngStream::root(0)).unwrap();
        assert_eq!(x, z);
    }

    #[test]
    fn long_inner_loop_reaches_prox_point() {
        let a = Matrix::from_row_slice(2, 2, &[0.5, 1.0, -1.0, 0.5]);
        let b = Vector::from_column_slice(&[0.3, -0.1]);
        let op = Arc::new(OperatorSpec::affine(a.clone(), b.clone()).unwrap());
        let l = op.constants().lipschitz;
        let eta = 0.4;
        let z = Vector::from_column_slice(&[1.0, 2.0]);
        let x = solve_inner_prox(
            &OracleSpec::exact(op),
            &z,
            eta,
            inner_step(eta, l),
            60,
            &RngStream::root(1),
        )
        .unwrap();
        assert!((x - exact_prox(&a, &b, &z, eta)).norm() < 1e-8);
    }

    #[test]
    fn per_step_contraction() {
        let a = Matrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, -2.0, 0.2, 1.0, 0.0, -1.0, 0.0]);
        let b = Vector::from_column_slice(&[1.0, 0.0, -1.0]);
        let op = Arc::new(OperatorSpec::affine(a.clone(), b.clone()).unwrap());
        let l = op.constants().lipschitz;
        for eta in [0.05, 0.3, 1.0 / l, 2.0] {
            let z = Vector::from_column_slice(&[0.3, -0.7, 2.0]);
            let star = exact_prox(&a, &b, &z, eta);
            let path = inner_prox_path(
                &OracleSpec::exact(op.clone()),
                &z,
                eta,
                inner_step(eta, l),
                20,
                &RngStream::root(2),
            )
            .unwrap();
            let bound = 1.0 - 1.0 / (eta * l + 1.0).powi(2);
            for w in path.windows(2) {
                let before = (&w[0] - &star).norm_squared();
                let after = (&w[1] - &star).norm_squared();
                assert!(after <= before * (bound + 1e-9) + 1e-28, "eta={eta}");
            }
        }
    }

    #[test]
    fn rejects_zero_steps() {
        let op = Arc::new(OperatorSpec::affine(Matrix::identity(1, 1), Vector::zeros(1)).unwrap());
        let z = Vector::zeros(1);
        assert!(solve_inner_prox(&OracleSpec::exact(op.clone()), &z, 1.0, 0.1, 0, &RngStream::root(0)).is_err());
        assert!(solve_inner_prox(
            &OracleSpec::exact(op),
            &Vector::zeros(2),
            1.0,
            0.1,
            1,
            &RngStream::root(0)
        )
        .is_err());
    }
}
