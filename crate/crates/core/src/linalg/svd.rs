//! One-sided (Hestenes) Jacobi SVD.
//!
//! Columns of a working copy of `A` are rotated pairwise until they are
//! mutually orthogonal; the column norms are then the singular values and the
//! accumulated rotations are the right singular vectors.

use crate::error::{Error, Result};
use crate::linalg::matrix::DenseMatrix;
use crate::linalg::vector::{dot, Vector};

pub const MAX_SWEEPS: usize = 60;
/// A pair of columns counts as orthogonal once
/// `|<a_p, a_q>| <= ORTHOGONALITY_TOL * |a_p| |a_q|`.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;
/// `sigma_min <= SINGULARITY_TOL * sigma_max` is treated as singular.
pub const SINGULARITY_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    /// Sorted descending.
    pub singular_values: Vector,
    /// Column `i` is the right singular vector for `singular_values[i]`.
    pub right_vectors: DenseMatrix,
}

impl SvdResult {
    pub fn sigma_max(&self) -> f64 {
        self.singular_values[0]
    }

    pub fn sigma_min(&self) -> f64 {
        *self
            .singular_values
            .last()
            .expect("non-empty by construction")
    }

    pub fn right_vector(&self, i: usize) -> Vector {
        self.right_vectors.column(i)
    }

    /// `sigma_max / sigma_min`; infinite for a zero smallest value.
    pub fn condition_number(&self) -> f64 {
        self.sigma_max() / self.sigma_min()
    }
}

/// Singular values and right singular vectors of a matrix with
/// `rows >= cols`.
pub fn singular_values(a: &DenseMatrix) -> Result<SvdResult> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::TooFewRows { rows: m, cols: n });
    }

    let mut cols: Vec<Vector> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vector> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();

    let fro_sq: f64 = a.entries().iter().map(|x| x * x).sum();
    // columns this small carry no information at double precision
    let negligible = (f64::EPSILON * f64::EPSILON) * fro_sq;

    let mut converged = n < 2;
    let mut residual = 0.0;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        residual = 0.0_f64;
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                let gamma = dot(&cols[p], &cols[q]);
                let ratio = gamma.abs() / (alpha * beta).sqrt();
                residual = residual.max(ratio);
                if ratio <= ORTHOGONALITY_TOL {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps, residual });
    }

    let mut order: Vec<(f64, usize)> = cols
        .iter()
        .enumerate()
        .map(|(j, c)| (dot(c, c).sqrt(), j))
        .collect();
    order.sort_by(|x, y| y.0.total_cmp(&x.0));

    let mut right = DenseMatrix::zeros(n, n);
    for (k, &(_, j)) in order.iter().enumerate() {
        for i in 0..n {
            right.set(i, k, v[j][i]);
        }
    }
    Ok(SvdResult {
        singular_values: order.iter().map(|&(s, _)| s).collect(),
        right_vectors: right,
    })
}

fn rotate(cols: &mut [Vector], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    let (cp, cq) = (&mut lo[p], &mut hi[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// `||A^-1||` computed as `1 / sigma_min`.
pub fn inverse_operator_norm(a: &DenseMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    inverse_norm_from_svd(&singular_values(a)?)
}

pub(crate) fn inverse_norm_from_svd(svd: &SvdResult) -> Result<f64> {
    let (smax, smin) = (svd.sigma_max(), svd.sigma_min());
    if smin <= SINGULARITY_TOL * smax || smin == 0.0 {
        return Err(Error::Singular {
            detail: format!("sigma_min {smin:e} vs sigma_max {smax:e}"),
        });
    }
    Ok(1.0 / smin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn random(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut rng = RngStream::new(seed);
        let e = (0..rows * cols).map(|_| rng.gaussian()).collect();
        DenseMatrix::new(rows, cols, e).unwrap()
    }

    #[test]
    fn diagonal_sorted() {
        let s = singular_values(&DenseMatrix::diagonal(&[3.0, 4.0])).unwrap();
        assert_eq!(s.singular_values, vec![4.0, 3.0]);
        assert_eq!(s.right_vector(0), vec![0.0, 1.0]);
    }

    #[test]
    fn rotation_has_unit_singular_values() {
        let (c, s) = (0.3_f64.cos(), 0.3_f64.sin());
        let r = DenseMatrix::from_rows(&[[c, -s], [s, c]]).unwrap();
        let svd = singular_values(&r).unwrap();
        for sv in svd.singular_values {
            assert!((sv - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn frobenius_identity_random_5x5() {
        let a = random(5, 5, 3);
        let svd = singular_values(&a).unwrap();
        let sum: f64 = svd.singular_values.iter().map(|s| s * s).sum();
        let fro2 = a.frobenius_norm().powi(2);
        assert!((sum - fro2).abs() <= 1e-10 * fro2);
    }

    #[test]
    fn right_vectors_orthonormal_and_eigen() {
        let a = random(9, 6, 5);
        let svd = singular_values(&a).unwrap();
        let v = &svd.right_vectors;
        let vtv = v.transpose().matmul(v).unwrap();
        assert!(vtv.max_abs_diff(&DenseMatrix::identity(6)) < 1e-10);
        let g = a.gram();
        let s1sq = svd.sigma_max().powi(2);
        for i in 0..6 {
            let vi = svd.right_vector(i);
            let gv = g.matvec(&vi).unwrap();
            let s2 = svd.singular_values[i].powi(2);
            let r: f64 = gv
                .iter()
                .zip(&vi)
                .map(|(x, y)| (x - s2 * y).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(r <= 1e-8 * s1sq);
        }
        assert!(svd
            .singular_values
            .windows(2)
            .all(|w| w[0] >= w[1] && w[1] >= 0.0));
    }

    #[test]
    fn rank_deficient_tall_matrix() {
        let b = DenseMatrix::from_rows(&[[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let svd = singular_values(&b).unwrap();
        assert!((svd.singular_values[0] - 2f64.sqrt()).abs() < 1e-14);
        assert!((svd.singular_values[1] - 1.0).abs() < 1e-14);
        let z = singular_values(&DenseMatrix::zeros(3, 2)).unwrap();
        assert_eq!(z.singular_values, vec![0.0, 0.0]);
    }

    #[test]
    fn wide_matrix_rejected() {
        assert!(matches!(
            singular_values(&DenseMatrix::zeros(2, 3)),
            Err(Error::TooFewRows { .. })
        ));
    }

    #[test]
    fn inverse_norm_examples() {
        assert!((inverse_operator_norm(&DenseMatrix::identity(3)).unwrap() - 1.0).abs() < 1e-15);
        let d = DenseMatrix::diagonal(&[2.0, 0.5]);
        assert!((inverse_operator_norm(&d).unwrap() - 2.0).abs() < 1e-15);

        let a = random(8, 8, 21);
        let svd = singular_values(&a).unwrap();
        let min = svd
            .singular_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert_eq!(inverse_operator_norm(&a).unwrap(), 1.0 / min);
    }

    #[test]
    fn inverse_norm_singular() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        assert!(matches!(
            inverse_operator_norm(&a),
            Err(Error::Singular { .. })
        ));
        assert!(matches!(
            inverse_operator_norm(&DenseMatrix::zeros(3, 2)),
            Err(Error::NotSquare { .. })
        ));
    }
}
