use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::Vector;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftSnapshot {
    /// `(1/M) Σ ‖p^m − p̄‖²`.
    pub mean_sq_dev: f64,
    /// `max_{m, m'} ‖p^m − p^{m'}‖²`.
    pub pairwise_max: f64,
}

pub fn client_drift(points: &[Vector]) -> Result<DriftSnapshot> {
    if points.len() < 2 {
        return Err(Error::param("points", "drift needs at least two clients"));
    }
    let dim = points[0].len();
    for p in points {
        Error::check_dim(dim, p.len())?;
    }
    let mut pairwise_max: f64 = 0.0;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            pairwise_max = pairwise_max.max((p - q).norm_squared());
        }
    }
    Ok(DriftSnapshot {
        mean_sq_dev: linalg::mean_sq_deviation(points),
        pairwise_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let same = vec![Vector::from_column_slice(&[1.0, 2.0]); 4];
        let d = client_drift(&same).unwrap();
        assert_eq!((d.mean_sq_dev, d.pairwise_max), (0.0, 0.0));

        let pm = [
            Vector::from_column_slice(&[1.0, 0.0]),
            Vector::from_column_slice(&[-1.0, 0.0]),
        ];
        let d = client_drift(&pm).unwrap();
        assert_eq!((d.mean_sq_dev, d.pairwise_max), (1.0, 4.0));

        let three: Vec<Vector> = (0..3).map(|i| Vector::from_element(1, i as f64)).collect();
        let d = client_drift(&three).unwrap();
        assert!((d.mean_sq_dev - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(d.pairwise_max, 4.0);
    }

    #[test]
    fn needs_two_clients() {
        assert!(client_drift(&[Vector::zeros(2)]).is_err());
    }
}
