use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::{Matrix, Vector};

/// Declared problem constants consumed by the step-size schedules.
///
/// `bound` (G), `cocoercivity` (β) and `second_order` (Λ) may be `+∞` when the
/// operator class does not have a finite value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub lipschitz: f64,
    pub bound: f64,
    pub cocoercivity: f64,
    pub second_order: f64,
    /// Strong-monotonicity modulus (0 for merely monotone operators).
    pub strong_monotonicity: f64,
}

impl Constants {
    fn unbounded(lipschitz: f64) -> Self {
        Self {
            lipschitz,
            bound: f64::INFINITY,
            cocoercivity: f64::INFINITY,
            second_order: f64::INFINITY,
            strong_monotonicity: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Affine,
    BilinearSaddle,
    Skew,
    QuadraticGradient,
    BoundedNonlinear,
    Regularized,
}

#[derive(Debug, Clone)]
pub enum OperatorKind {
    /// `V(z) = A z + b`.
    Affine { matrix: Matrix, offset: Vector },
    /// `V(x, y) = (B y + c, −Bᵀ x + d)` on the stacked variable `(x, y)`.
    BilinearSaddle { coupling: Matrix, c: Vector, d: Vector },
    /// `V(z) = J z` with `J = −Jᵀ`.
    Skew { matrix: Matrix },
    /// `V(z) = H z + b` with `H` symmetric positive semidefinite.
    QuadraticGradient { hessian: Matrix, offset: Vector },
    /// `V(z) = Aᵀ s(A z + b)` with `s(u) = saturation · tanh(u)` componentwise.
    BoundedNonlinear {
        core: Matrix,
        offset: Vector,
        saturation: f64,
    },
    /// `F(x) = V(x) + (x − center) / η`.
    Regularized {
        base: Arc<OperatorSpec>,
        center: Vector,
        eta: f64,
    },
    /// `V(z) + shift`, used for heterogeneous clients.
    Shifted { base: Arc<OperatorSpec>, shift: Vector },
}

/// A monotone operator on `R^d` with its declared constants.
#[derive(Debug, Clone)]
pub struct OperatorSpec {
    dim: usize,
    kind: OperatorKind,
    constants: Constants,
    solution: Option<Vector>,
}

fn monotone_tolerance(a: &Matrix) -> f64 {
    1e-10 * linalg::spectral_norm(a).max(1.0)
}

/// Smallest β with `‖A w‖² ≤ β ⟨A w, w⟩` for all w, or `+∞` when the
/// affine map is not co-coercive.
pub fn affine_cocoercivity(a: &Matrix) -> f64 {
    let norm = linalg::spectral_norm(a);
    if norm == 0.0 {
        return 0.0;
    }
    let (values, vectors) = linalg::sorted_eigen(&linalg::sym_part(a));
    let tol = 1e-10 * norm;
    let mut beta: f64 = 0.0;
    let range: Vec<usize> = (0..values.len()).filter(|&i| values[i] > tol).collect();
    for (i, &v) in values.iter().enumerate() {
        if v <= tol && (a * vectors.column(i)).norm() > 1e-8 * norm {
            return f64::INFINITY;
        }
    }
    if range.is_empty() {
        return beta;
    }
    let mut p = Matrix::zeros(a.nrows(), range.len());
    for (col, &i) in range.iter().enumerate() {
        p.set_column(col, &(vectors.column(i) / values[i].sqrt()));
    }
    let m = p.transpose() * a.transpose() * a * &p;
    beta = beta.max(linalg::max_eigenvalue(&linalg::sym_part(&m)));
    beta
}

impl OperatorSpec {
    /// General affine operator. Rejects matrices whose symmetric part is not
    /// positive semidefinite.
    pub fn affine(matrix: Matrix, offset: Vector) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(Error::param("matrix", "must be square"));
        }
        Error::check_dim(dim, offset.len())?;
        let sym = linalg::sym_part(&matrix);
        let min_eig = linalg::min_eigenvalue(&sym);
        if min_eig < -monotone_tolerance(&matrix) {
            return Err(Error::param(
                "matrix",
                format!("A + Aᵀ is not positive semidefinite (min eigenvalue {min_eig:e})"),
            ));
        }
        let lipschitz = linalg::spectral_norm(&matrix);
        let constants = Constants {
            lipschitz,
            bound: if lipschitz == 0.0 { offset.norm() } else { f64::INFINITY },
            cocoercivity: affine_cocoercivity(&matrix),
            second_order: 0.0,
            strong_monotonicity: min_eig.max(0.0),
        };
        Ok(Self {
            dim,
            kind: OperatorKind::Affine { matrix, offset },
            constants,
            solution: None,
        })
    }

    pub fn bilinear_saddle(coupling: Matrix, c: Vector, d: Vector) -> Result<Self> {
        Error::check_dim(coupling.nrows(), c.len())?;
        Error::check_dim(coupling.ncols(), d.len())?;
        let dim = c.len() + d.len();
        let lipschitz = linalg::spectral_norm(&coupling);
        let mut constants = Constants::unbounded(lipschitz);
        constants.second_order = 0.0;
        if lipschitz == 0.0 {
            constants.bound = (c.norm_squared() + d.norm_squared()).sqrt();
            constants.cocoercivity = 0.0;
        }
        let solution = if coupling.is_square() && linalg::min_singular_value(&coupling) > 1e-12 {
            let lu = coupling.clone().lu();
            let lut = coupling.transpose().lu();
            // B y + c = 0 and −Bᵀ x + d = 0
            match (lut.solve(&d), lu.solve(&(-&c))) {
                (Some(x), Some(y)) => {
                    let mut s = Vector::zeros(dim);
                    s.rows_mut(0, c.len()).copy_from(&x);
                    s.rows_mut(c.len(), d.len()).copy_from(&y);
                    Some(s)
                }
                _ => None,
            }
        } else {
            None
        };
        Ok(Self {
            dim,
            kind: OperatorKind::BilinearSaddle { coupling, c, d },
            constants,
            solution,
        })
    }

    pub fn skew(matrix: Matrix) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(Error::param("matrix", "must be square"));
        }
        let asym = (&matrix + matrix.transpose()).norm();
        if asym > 1e-12 * matrix.norm().max(1.0) {
            return Err(Error::param("matrix", "skew operator requires J = −Jᵀ"));
        }
        let lipschitz = linalg::spectral_norm(&matrix);
        let mut constants = Constants::unbounded(lipschitz);
        constants.second_order = 0.0;
        if lipschitz == 0.0 {
            constants.bound = 0.0;
            constants.cocoercivity = 0.0;
        }
        Ok(Self {
            dim,
            kind: OperatorKind::Skew { matrix },
            constants,
            solution: Some(Vector::zeros(dim)),
        })
    }

    pub fn quadratic_gradient(hessian: Matrix, offset: Vector) -> Result<Self> {
        let dim = hessian.nrows();
        if hessian.ncols() != dim {
            return Err(Error::param("hessian", "must be square"));
        }
        Error::check_dim(dim, offset.len())?;
        if (&hessian - hessian.transpose()).norm() > 1e-12 * hessian.norm().max(1.0) {
            return Err(Error::param("hessian", "must be symmetric"));
        }
        let (values, _) = linalg::sorted_eigen(&hessian);
        let lo = values.first().copied().unwrap_or(0.0);
        let hi = values.last().copied().unwrap_or(0.0);
        if lo < -monotone_tolerance(&hessian) {
            return Err(Error::param("hessian", "must be positive semidefinite"));
        }
        let constants = Constants {
            lipschitz: hi,
            bound: if hi == 0.0 { offset.norm() } else { f64::INFINITY },
            cocoercivity: hi,
            second_order: 0.0,
            strong_monotonicity: lo.max(0.0),
        };
        Ok(Self {
            dim,
            kind: OperatorKind::QuadraticGradient { hessian, offset },
            constants,
            solution: None,
        })
    }

    /// `V(z) = Aᵀ (s · tanh(A z + b))`, the gradient of the convex function
    /// `s Σ log cosh((A z + b)_i)`. Bounded by `s ‖A‖ √d`.
    pub fn bounded_nonlinear(core: Matrix, offset: Vector, saturation: f64) -> Result<Self> {
        let dim = core.ncols();
        Error::check_dim(core.nrows(), offset.len())?;
        if !(saturation > 0.0 && saturation.is_finite()) {
            return Err(Error::param("saturation", "must be positive and finite"));
        }
        let norm = linalg::spectral_norm(&core);
        let lipschitz = saturation * norm * norm;
        // max |tanh''| = 4 / (3√3)
        let tanh_curvature = 4.0 / (3.0 * 3f64.sqrt());
        let constants = Constants {
            lipschitz,
            bound: saturation * norm * (core.nrows() as f64).sqrt(),
            cocoercivity: lipschitz,
            second_order: 0.5 * tanh_curvature * saturation * norm.powi(3),
            strong_monotonicity: 0.0,
        };
        Ok(Self {
            dim,
            kind: OperatorKind::BoundedNonlinear {
                core,
                offset,
                saturation,
            },
            constants,
            solution: None,
        })
    }

    /// `F(x) = V(x) + (x − center)/η`: `1/η`-strongly monotone and
    /// `(L + 1/η)`-smooth.
    pub fn regularized(base: Arc<OperatorSpec>, center: Vector, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::param("eta", "must be positive"));
        }
        Error::check_dim(base.dim, center.len())?;
        let b = base.constants;
        let lipschitz = b.lipschitz + 1.0 / eta;
        let constants = Constants {
            lipschitz,
            bound: f64::INFINITY,
            cocoercivity: eta * lipschitz * lipschitz,
            second_order: b.second_order,
            strong_monotonicity: b.strong_monotonicity + 1.0 / eta,
        };
        Ok(Self {
            dim: base.dim,
            kind: OperatorKind::Regularized { base, center, eta },
            constants,
            solution: None,
        })
    }

    pub fn shifted(base: Arc<OperatorSpec>, shift: Vector) -> Result<Self> {
        Error::check_dim(base.dim, shift.len())?;
        let mut constants = base.constants;
        constants.bound += shift.norm();
        Ok(Self {
            dim: base.dim,
            kind: OperatorKind::Shifted { base, shift },
            constants,
            solution: None,
        })
    }

    pub fn with_solution(mut self, solution: Vector) -> Result<Self> {
        Error::check_dim(self.dim, solution.len())?;
        self.solution = Some(solution);
        Ok(self)
    }

    /// Replace declared constants with conservative values supplied by the caller.
    pub fn with_constants(mut self, constants: Constants) -> Self {
        self.constants = constants;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn problem_kind(&self) -> ProblemKind {
        match &self.kind {
            OperatorKind::Affine { .. } => ProblemKind::Affine,
            OperatorKind::BilinearSaddle { .. } => ProblemKind::BilinearSaddle,
            OperatorKind::Skew { .. } => ProblemKind::Skew,
            OperatorKind::QuadraticGradient { .. } => ProblemKind::QuadraticGradient,
            OperatorKind::BoundedNonlinear { .. } => ProblemKind::BoundedNonlinear,
            OperatorKind::Regularized { .. } => ProblemKind::Regularized,
            OperatorKind::Shifted { base, .. } => base.problem_kind(),
        }
    }

    pub fn constants(&self) -> &Constants {
        &self.constants
    }

    pub fn solution(&self) -> Option<&Vector> {
        self.solution.as_ref()
    }

    pub fn is_affine(&self) -> bool {
        match &self.kind {
            OperatorKind::BoundedNonlinear { .. } => false,
            OperatorKind::Regularized { base, .. } | OperatorKind::Shifted { base, .. } => base.is_affine(),
            _ => true,
        }
    }

    /// `(A, b)` with `V(z) = A z + b` when the operator is affine.
    pub fn affine_parts(&self) -> Option<(Matrix, Vector)> {
        match &self.kind {
            OperatorKind::Affine { matrix, offset } => Some((matrix.clone(), offset.clone())),
            OperatorKind::BilinearSaddle { coupling, c, d } => {
                let (n, p) = coupling.shape();
                let mut a = Matrix::zeros(n + p, n + p);
                a.view_mut((0, n), (n, p)).copy_from(coupling);
                a.view_mut((n, 0), (p, n)).copy_from(&(-coupling.transpose()));
                let mut b = Vector::zeros(n + p);
                b.rows_mut(0, n).copy_from(c);
                b.rows_mut(n, p).copy_from(d);
                Some((a, b))
            }
            OperatorKind::Skew { matrix } => Some((matrix.clone(), Vector::zeros(self.dim))),
            OperatorKind::QuadraticGradient { hessian, offset } => Some((hessian.clone(), offset.clone())),
            OperatorKind::BoundedNonlinear { .. } => None,
            OperatorKind::Regularized { base, center, eta } => {
                let (a, b) = base.affine_parts()?;
                let id = Matrix::identity(self.dim, self.dim);
                Some((a + id / *eta, b - center / *eta))
            }
            OperatorKind::Shifted { base, shift } => {
                let (a, b) = base.affine_parts()?;
                Some((a, b + shift))
            }
        }
    }

    /// Checked evaluation of `V(z)`.
    pub fn eval(&self, z: &Vector) -> Result<Vector> {
        Error::check_dim(self.dim, z.len())?;
        Ok(self.apply(z))
    }

    /// Unchecked evaluation; callers guarantee `z.len() == dim`.
    pub fn apply(&self, z: &Vector) -> Vector {
        debug_assert_eq!(z.len(), self.dim);
        match &self.kind {
            OperatorKind::Affine { matrix, offset }
            | OperatorKind::QuadraticGradient {
                hessian: matrix,
                offset,
            } => matrix * z + offset,
            OperatorKind::BilinearSaddle { coupling, c, d } => {
                let n = c.len();
                let x = z.rows(0, n);
                let y = z.rows(n, d.len());
                let mut out = Vector::zeros(self.dim);
                out.rows_mut(0, n).copy_from(&(coupling * y + c));
                out.rows_mut(n, d.len()).copy_from(&(d - coupling.transpose() * x));
                out
            }
            OperatorKind::Skew { matrix } => matrix * z,
            OperatorKind::BoundedNonlinear {
                core,
                offset,
                saturation,
            } => {
                let u = core * z + offset;
                core.transpose() * u.map(|v| saturation * v.tanh())
            }
            OperatorKind::Regularized { base, center, eta } => base.apply(z) + (z - center) / *eta,
            OperatorKind::Shifted { base, shift } => base.apply(z) + shift,
        }
    }

    /// Jacobian of `V` at `z`.
    pub fn jacobian(&self, z: &Vector) -> Matrix {
        match &self.kind {
            OperatorKind::BoundedNonlinear {
                core,
                offset,
                saturation,
            } => {
                let u = core * z + offset;
                let weights = u.map(|v| {
                    let c = v.cosh();
                    saturation / (c * c)
                });
                core.transpose() * Matrix::from_diagonal(&weights) * core
            }
            OperatorKind::Regularized { base, eta, .. } => {
                base.jacobian(z) + Matrix::identity(self.dim, self.dim) / *eta
            }
            OperatorKind::Shifted { base, .. } => base.jacobian(z),
            _ => self.affine_parts().expect("affine kinds").0,
        }
    }

    /// Upper bound on `‖V(z)‖` over the ball `‖z − center‖ ≤ radius`.
    pub fn bound_on_ball(&self, center: &Vector, radius: f64) -> f64 {
        let local = self.apply(center).norm() + self.constants.lipschitz * radius;
        local.min(self.constants.bound)
    }
}

/// Build `F(x) = V(x) + (x − center)/η` from an existing operator.
pub fn regularize(op: &Arc<OperatorSpec>, center: &Vector, eta: f64) -> Result<OperatorSpec> {
    OperatorSpec::regularized(Arc::clone(op), center.clone(), eta)
}

/// Checked evaluation of an operator at a point.
pub fn eval_operator(op: &OperatorSpec, z: &Vector) -> Result<Vector> {
    op.eval(z)
}
