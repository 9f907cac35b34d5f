//! Norm-squared row sampling by inverse-CDF lookup.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::rng::RngStream;

/// Cumulative distribution over rows with weights `||a_i||^2 / ||A||_F^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RowSampler {
    cumulative: Vec<f64>,
}

impl RowSampler {
    /// Weights must all be strictly positive.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty("no rows to sample"));
        }
        if let Some(row) = weights
            .iter()
            .position(|&w| w.is_nan() || w <= 0.0 || w.is_infinite())
        {
            return Err(Error::ZeroRow { row });
        }
        let total = crate::stats::compensated_sum(weights.iter().copied());
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc / total
            })
            .collect();
        *cumulative.last_mut().expect("non-empty") = 1.0;
        Ok(Self { cumulative })
    }

    pub fn for_matrix(a: &DenseMatrix) -> Result<Self> {
        Self::from_weights(&a.row_norms_sq())
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    pub fn probability(&self, i: usize) -> f64 {
        if i == 0 {
            self.cumulative[0]
        } else {
            self.cumulative[i] - self.cumulative[i - 1]
        }
    }

    /// Index `i` with probability `||a_i||^2 / ||A||_F^2`.
    #[inline]
    pub fn sample(&self, rng: &mut RngStream) -> usize {
        let u = rng.uniform();
        let i = self.cumulative.partition_point(|&c| c <= u);
        i.min(self.cumulative.len() - 1)
    }
}

pub fn sample_row(sampler: &RowSampler, rng: &mut RngStream) -> usize {
    sampler.sample(rng)
}
