use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::operator::OperatorSpec;
use super::rng::RngStream;
use crate::error::{Error, Result};
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseModel {
    /// Per-coordinate standard deviation `σ/√d`, so `E‖noise‖² = σ²`.
    #[default]
    GaussianIsotropic,
    /// Per-coordinate uniform on `[−a, a]` with `a = σ √(3/d)`, so `E‖noise‖² = σ²`.
    BoundedUniform,
    None,
}

/// Unbiased stochastic oracle `Ṽ(z) = V(z + δ s) + noise`.
#[derive(Debug, Clone)]
pub struct OracleSpec {
    pub base: Arc<OperatorSpec>,
    pub noise_model: NoiseModel,
    pub sigma: f64,
    pub smoothing_delta: f64,
}

impl OracleSpec {
    pub fn new(base: Arc<OperatorSpec>, noise_model: NoiseModel, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::param("sigma", "must be finite and nonnegative"));
        }
        Ok(Self {
            base,
            noise_model,
            sigma,
            smoothing_delta: 0.0,
        })
    }

    pub fn exact(base: Arc<OperatorSpec>) -> Self {
        Self {
            base,
            noise_model: NoiseModel::None,
            sigma: 0.0,
            smoothing_delta: 0.0,
        }
    }

    pub fn with_smoothing(&self, delta: f64) -> Self {
        Self {
            smoothing_delta: delta,
            ..self.clone()
        }
    }

    pub fn with_base(&self, base: Arc<OperatorSpec>) -> Self {
        Self { base, ..self.clone() }
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Largest `E‖Ṽ(z) − V(z)‖²` over the noise model (0 when noiseless).
    pub fn variance_bound(&self) -> f64 {
        match self.noise_model {
            NoiseModel::None => 0.0,
            _ => self.sigma * self.sigma,
        }
    }

    /// Draw `Ṽ(z)`. The draw order inside the stream is fixed: the smoothing
    /// direction `s` first (only when `δ > 0`), then the additive noise.
    pub fn sample(&self, z: &Vector, stream: &RngStream) -> Result<Vector> {
        Error::check_dim(self.dim(), z.len())?;
        Ok(self.sample_unchecked(z, stream))
    }

    pub(crate) fn sample_unchecked(&self, z: &Vector, stream: &RngStream) -> Vector {
        let noisy = self.noise_model != NoiseModel::None && self.sigma > 0.0;
        if self.smoothing_delta == 0.0 && !noisy {
            return self.base.apply(z);
        }
        let d = self.dim();
        let mut rng = stream.rng();
        let mut value = if self.smoothing_delta > 0.0 {
            let shifted = Vector::from_iterator(
                d,
                z.iter()
                    .map(|&zi| zi + self.smoothing_delta * rng.sample::<f64, _>(StandardNormal)),
            );
            self.base.apply(&shifted)
        } else {
            self.base.apply(z)
        };
        if noisy {
            let dn = d as f64;
            match self.noise_model {
                NoiseModel::GaussianIsotropic => {
                    let scale = self.sigma / dn.sqrt();
                    for v in value.iter_mut() {
                        *v += scale * rng.sample::<f64, _>(StandardNormal);
                    }
                }
                NoiseModel::BoundedUniform => {
                    let half_width = self.sigma * (3.0 / dn).sqrt();
                    for v in value.iter_mut() {
                        *v += rng.gen_range(-half_width..=half_width);
                    }
                }
                NoiseModel::None => {}
            }
        }
        value
    }
}

/// Free-function form of [`OracleSpec::sample`].
pub fn sample_oracle(oracle: &OracleSpec, z: &Vector, stream: &RngStream) -> Result<Vector> {
    oracle.sample(z, stream)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vi_core::rng::DrawPath;
    use crate::Matrix;

    fn affine_op() -> Arc<OperatorSpec> {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 0.5, -0.5, 0.2]);
        Arc::new(OperatorSpec::affine(a, Vector::from_column_slice(&[0.3, -0.1])).unwrap())
    }

    fn stream(i: usize) -> RngStream {
        RngStream::new(9, DrawPath::new(0, i, 0, 0))
    }

    #[test]
    fn noiseless_oracle_is_exact() {
        let op = affine_op();
        let oracle = OracleSpec::new(Arc::clone(&op), NoiseModel::GaussianIsotropic, 0.0).unwrap();
        let z = Vector::from_column_slice(&[1.0, -2.0]);
        assert_eq!(oracle.sample(&z, &stream(0)).unwrap(), op.apply(&z));
    }

    #[test]
    fn gaussian_mean_and_variance() {
        let op = affine_op();
        let sigma = 1.0;
        let oracle = OracleSpec::new(Arc::clone(&op), NoiseModel::GaussianIsotropic, sigma).unwrap();
        let z = Vector::from_column_slice(&[0.4, 0.7]);
        let exact = op.apply(&z);
        let n = 100_000;
        let mut sum = Vector::zeros(2);
        let mut second = 0.0;
        for i in 0..n {
            let draw = oracle.sample(&z, &stream(i)).unwrap();
            second += (&draw - &exact).norm_squared();
            sum += draw;
        }
        let mean = sum / n as f64;
        let nf = n as f64;
        for k in 0..2 {
            assert!((mean[k] - exact[k]).abs() < 5.0 * sigma / nf.sqrt());
        }
        assert!(second / nf <= sigma * sigma * (1.0 + 5.0 / nf.sqrt()));
    }

    #[test]
    fn uniform_noise_second_moment() {
        let op = affine_op();
        let oracle = OracleSpec::new(Arc::clone(&op), NoiseModel::BoundedUniform, 2.0).unwrap();
        let z = Vector::zeros(2);
        let exact = op.apply(&z);
        let n = 50_000;
        let mut second = 0.0;
        let mut sum = Vector::zeros(2);
        for i in 0..n {
            let draw = oracle.sample(&z, &stream(i)).unwrap();
            second += (&draw - &exact).norm_squared();
            sum += draw;
        }
        let nf = n as f64;
        assert!(second / nf <= 4.0 * (1.0 + 5.0 / nf.sqrt()));
        assert!(((sum / nf) - exact).amax() < 5.0 * 2.0 / nf.sqrt());
    }

    #[test]
    fn smoothing_is_unbiased_for_affine() {
        let op = affine_op();
        let oracle = OracleSpec::exact(Arc::clone(&op)).with_smoothing(0.1);
        let z = Vector::from_column_slice(&[1.0, 1.0]);
        let n = 100_000;
        let mut sum = Vector::zeros(2);
        for i in 0..n {
            sum += oracle.sample(&z, &stream(i)).unwrap();
        }
        let mean = sum / n as f64;
        // per-coordinate std of A δ s is at most δ ‖A‖
        let tol = 5.0 * 0.1 * 1.2 / (n as f64).sqrt();
        assert!((mean - op.apply(&z)).amax() < tol);
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        let oracle = OracleSpec::exact(affine_op());
        assert!(oracle.sample(&Vector::zeros(5), &stream(0)).is_err());
    }
}
