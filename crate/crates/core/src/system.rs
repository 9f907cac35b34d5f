use crate::error::{Error, Result};
use crate::linalg::vector::{norm, sub, Vector};
use crate::linalg::DenseMatrix;

/// Tolerance for `||A x* - b|| <= tol * (1 + ||b||)` when a known solution
/// is attached.
pub const KNOWN_SOLUTION_TOL: f64 = 1e-8;

/// A square system `A x = b` whose rows all define proper hyperplanes.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    a: DenseMatrix,
    b: Vector,
    row_norms_sq: Vector,
    frobenius_sq: f64,
    known_solution: Option<Vector>,
}

impl LinearSystem {
    pub fn new(a: DenseMatrix, b: Vector) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        if b.len() != a.rows() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                got: b.len(),
            });
        }
        let row_norms_sq = a.row_norms_sq();
        if let Some(row) = row_norms_sq.iter().position(|&w| w <= 0.0) {
            return Err(Error::ZeroRow { row });
        }
        let frobenius_sq = crate::stats::compensated_sum(row_norms_sq.iter().copied());
        Ok(Self {
            a,
            b,
            row_norms_sq,
            frobenius_sq,
            known_solution: None,
        })
    }

    /// Builds `b = A x*` and remembers `x*`.
    pub fn with_planted_solution(a: DenseMatrix, solution: Vector) -> Result<Self> {
        let b = a.matvec(&solution)?;
        Self::new(a, b)?.with_known_solution(solution)
    }

    pub fn with_known_solution(mut self, solution: Vector) -> Result<Self> {
        let residual = norm(&sub(&self.a.matvec(&solution)?, &self.b));
        if residual > KNOWN_SOLUTION_TOL * (1.0 + norm(&self.b)) {
            return Err(Error::Config(format!(
                "known solution has residual {residual:e}"
            )));
        }
        self.known_solution = Some(solution);
        Ok(self)
    }

    /// The same matrix with `b = 0`; its known solution is the origin.
    pub fn homogeneous(&self) -> Self {
        let n = self.dim();
        Self {
            a: self.a.clone(),
            b: vec![0.0; n],
            row_norms_sq: self.row_norms_sq.clone(),
            frobenius_sq: self.frobenius_sq,
            known_solution: Some(vec![0.0; n]),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    #[inline]
    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    #[inline]
    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    #[inline]
    pub fn row_norms_sq(&self) -> &[f64] {
        &self.row_norms_sq
    }

    #[inline]
    pub fn frobenius_sq(&self) -> f64 {
        self.frobenius_sq
    }

    pub fn known_solution(&self) -> Option<&[f64]> {
        self.known_solution.as_deref()
    }

    pub fn residual_norm(&self, x: &[f64]) -> Result<f64> {
        Ok(norm(&sub(&self.a.matvec(x)?, &self.b)))
    }

    /// `||A||_F^2 ||A^-1||^2`, the scale governing every rate in this crate.
    pub fn scaled_condition_sq(&self) -> Result<f64> {
        let inv = crate::linalg::inverse_operator_norm(&self.a)?;
        Ok(self.frobenius_sq * inv * inv)
    }
}
