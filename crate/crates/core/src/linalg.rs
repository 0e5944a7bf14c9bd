//! Small dense linear-algebra helpers shared by the zoo and the gap solvers.

use nalgebra::SymmetricEigen;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Matrix, Vector};

/// Symmetric part `(A + Aᵀ) / 2`.
pub fn sym_part(a: &Matrix) -> Matrix {
    (a + a.transpose()) * 0.5
}

/// Largest singular value.
pub fn spectral_norm(a: &Matrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.singular_values().max()
}

/// Smallest singular value.
pub fn min_singular_value(a: &Matrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.singular_values().min()
}

/// Eigenvalues of a symmetric matrix in ascending order together with the
/// matching orthonormal eigenvectors (as columns).
pub fn sorted_eigen(s: &Matrix) -> (Vec<f64>, Matrix) {
    let eig = SymmetricEigen::new(s.clone());
    let n = s.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

pub fn min_eigenvalue(s: &Matrix) -> f64 {
    sorted_eigen(s).0.first().copied().unwrap_or(0.0)
}

pub fn max_eigenvalue(s: &Matrix) -> f64 {
    sorted_eigen(s).0.last().copied().unwrap_or(0.0)
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vector {
    Vector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Haar-ish random orthogonal matrix from the QR factorisation of a Gaussian.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Matrix {
    let g = gaussian_matrix(rng, n, n);
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix column signs so the distribution does not depend on the QR sign convention
    let mut q = q;
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            let col = -q.column(j);
            q.set_column(j, &col);
        }
    }
    q
}

/// Uniform sample from the ball of the given radius around `center`.
pub fn uniform_in_ball<R: Rng + ?Sized>(rng: &mut R, center: &Vector, radius: f64) -> Vector {
    let n = center.len();
    let dir = unit_direction(rng, n);
    let u: f64 = rng.gen();
    let r = radius * u.powf(1.0 / n.max(1) as f64);
    center + dir * r
}

/// Uniform direction on the unit sphere.
pub fn unit_direction<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vector {
    loop {
        let g = gaussian_vector(rng, n);
        let norm = g.norm();
        if norm > 1e-12 {
            return g / norm;
        }
    }
}

/// Euclidean projection onto the ball `‖z − center‖ ≤ radius`.
pub fn project_ball(z: &Vector, center: &Vector, radius: f64) -> Vector {
    let diff = z - center;
    let norm = diff.norm();
    if norm <= radius {
        z.clone()
    } else {
        center + diff * (radius / norm)
    }
}

/// Arithmetic mean of equally sized vectors, summed in slice order. The mean
/// of identical points is that point exactly.
pub fn mean(points: &[Vector]) -> Vector {
    if points.iter().all(|p| p == &points[0]) {
        return points[0].clone();
    }
    let mut acc = Vector::zeros(points[0].len());
    for p in points {
        acc += p;
    }
    acc / points.len() as f64
}

/// Mean of `‖p − p̄‖²` over the points.
pub fn mean_sq_deviation(points: &[Vector]) -> f64 {
    let center = mean(points);
    points.iter().map(|p| (p - &center).norm_squared()).sum::<f64>() / points.len() as f64
}
