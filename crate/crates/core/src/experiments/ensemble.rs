//! Random matrix ensembles and planted test instances.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::vector::{axpy, dot, norm, Vector};
use crate::linalg::{solve_direct, DenseMatrix};
use crate::rng::RngStream;
use crate::system::LinearSystem;

/// i.i.d. standard normal entries, each row then scaled to unit length, so
/// `||A||_F^2 = n`.
pub fn gen_gaussian_row_normalized(n: usize, rng: &mut RngStream) -> Result<DenseMatrix> {
    if n < 2 {
        return Err(Error::Config(format!(
            "dimension must be at least 2, got {n}"
        )));
    }
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n {
        loop {
            let row = rng.gaussian_vector(n);
            let len = norm(&row);
            if len > 0.0 {
                for (dst, v) in a.row_mut(i).iter_mut().zip(&row) {
                    *dst = v / len;
                }
                break;
            }
        }
    }
    Ok(a)
}

/// Haar-like random orthogonal matrix from Gram–Schmidt on Gaussian rows.
pub fn random_orthogonal(n: usize, rng: &mut RngStream) -> DenseMatrix {
    let mut rows: Vec<Vector> = Vec::with_capacity(n);
    while rows.len() < n {
        let mut v = rng.gaussian_vector(n);
        // two passes keep the rows orthogonal to working precision
        for _ in 0..2 {
            for q in &rows {
                let c = dot(&v, q);
                axpy(-c, q, &mut v);
            }
        }
        let len = norm(&v);
        if len > 1e-8 {
            rows.push(v.into_iter().map(|x| x / len).collect());
        }
    }
    DenseMatrix::from_rows(&rows).expect("square by construction")
}

/// How the solution and starting point of a planted instance are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartRule {
    /// `b ~ N(0, I)`, `x* = A^-1 b`, start one unit from `x*` on the segment
    /// towards the origin. This is the walk from a fixed start at the origin,
    /// rescaled to unit radius.
    OriginRay,
    /// `x* ~ N(0, I)`, `b = A x*`, start one unit from `x*` in a uniformly
    /// random direction.
    UniformDirection,
}

impl StartRule {
    pub fn describe(self) -> &'static str {
        match self {
            StartRule::OriginRay => {
                "b ~ N(0,I), x* = A^-1 b, x1 = x* - x*/|x*| (unit distance from x*, towards the origin)"
            }
            StartRule::UniformDirection => {
                "x* ~ N(0,I), b = A x*, x1 = x* + u with u uniform on the unit sphere"
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedInstance {
    /// Carries `x*` as its known solution.
    pub system: LinearSystem,
    pub x1: Vector,
}

impl PlantedInstance {
    pub fn solution(&self) -> &[f64] {
        self.system.known_solution().expect("planted")
    }
}

pub fn planted_instance(
    a: DenseMatrix,
    rule: StartRule,
    rng: &mut RngStream,
) -> Result<PlantedInstance> {
    let n = a.rows();
    match rule {
        StartRule::OriginRay => {
            let g = rng.gaussian_vector(n);
            let xs = solve_direct(&a, &g)?;
            let len = norm(&xs);
            let x1 = xs.iter().map(|v| v - v / len).collect();
            Ok(PlantedInstance {
                system: LinearSystem::with_planted_solution(a, xs)?,
                x1,
            })
        }
        StartRule::UniformDirection => {
            let xs = rng.gaussian_vector(n);
            let u = rng.unit_vector(n);
            let x1 = xs.iter().zip(&u).map(|(x, d)| x + d).collect();
            Ok(PlantedInstance {
                system: LinearSystem::with_planted_solution(a, xs)?,
                x1,
            })
        }
    }
}
