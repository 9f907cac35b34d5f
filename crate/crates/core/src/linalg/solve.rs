use crate::error::{Error, Result};
use crate::linalg::matrix::DenseMatrix;
use crate::linalg::vector::Vector;

/// Relative pivot threshold, measured against the largest initial magnitude
/// in the pivot column.
pub const PIVOT_TOLERANCE: f64 = 1e-13;

/// Solves the square system `A x = b` by Gaussian elimination with partial
/// pivoting.
pub fn solve_direct(a: &DenseMatrix, b: &[f64]) -> Result<Vector> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }

    let col_max: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| a.get(i, j).abs()).fold(0.0, f64::max))
        .collect();

    // augmented [A | b], row-major with stride n + 1
    let stride = n + 1;
    let mut m = Vec::with_capacity(n * stride);
    for (row, &bi) in a.row_iter().zip(b) {
        m.extend_from_slice(row);
        m.push(bi);
    }

    for k in 0..n {
        let (p, pmag) = (k..n)
            .map(|i| (i, m[i * stride + k].abs()))
            .fold((k, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if pmag == 0.0 || pmag < PIVOT_TOLERANCE * col_max[k] {
            return Err(Error::Singular {
                detail: format!(
                    "pivot {pmag:e} in column {k} below {PIVOT_TOLERANCE:e} x {:e}",
                    col_max[k]
                ),
            });
        }
        if p != k {
            for j in 0..stride {
                m.swap(k * stride + j, p * stride + j);
            }
        }
        let pivot = m[k * stride + k];
        for i in (k + 1)..n {
            let factor = m[i * stride + k] / pivot;
            if factor == 0.0 {
                continue;
            }
            m[i * stride + k] = 0.0;
            for j in (k + 1)..stride {
                m[i * stride + j] -= factor * m[k * stride + j];
            }
        }
    }

    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = m[i * stride + n];
        for j in (i + 1)..n {
            s -= m[i * stride + j] * x[j];
        }
        x[i] = s / m[i * stride + i];
    }
    Ok(x)
}
