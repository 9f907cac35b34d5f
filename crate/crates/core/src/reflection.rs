//! Random reflections through row hyperplanes, plus the projection-based
//! baselines they are compared against.
//!
//! Reflecting a point through the hyperplane `<a_i, z> = b_i` leaves its
//! distance to every solution of the full system unchanged, so a random
//! walk of reflections stays on the sphere around the solution through the
//! starting point. Averaging the walk estimates the center of that sphere.

use std::io::Write;

use crate::error::{Error, Result};
use crate::linalg::vector::{axpy, distance, dot, norm_sq, Vector};
use crate::rng::RngStream;
use crate::sampling::RowSampler;
use crate::system::LinearSystem;

fn check_row(x: &[f64], a: &[f64]) -> Result<f64> {
    if x.len() != a.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: x.len(),
        });
    }
    let w = norm_sq(a);
    if w <= 0.0 {
        return Err(Error::ZeroRow { row: 0 });
    }
    Ok(w)
}

/// Mirror image of `x` through `<a, z> = b_i`.
pub fn reflect_step(x: &[f64], a: &[f64], b_i: f64) -> Result<Vector> {
    let w = check_row(x, a)?;
    let mut out = x.to_vec();
    axpy(2.0 * (b_i - dot(x, a)) / w, a, &mut out);
    Ok(out)
}

/// Orthogonal projection of `x` onto `<a, z> = b_i`.
pub fn kaczmarz_step(x: &[f64], a: &[f64], b_i: f64) -> Result<Vector> {
    let w = check_row(x, a)?;
    let mut out = x.to_vec();
    axpy((b_i - dot(x, a)) / w, a, &mut out);
    Ok(out)
}

/// `x + (lambda / n) * sum_i ((b_i - <x, a_i>) / ||a_i||^2) a_i`.
pub fn cimmino_step(x: &[f64], system: &LinearSystem, lambda: f64) -> Result<Vector> {
    let n = system.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let a = system.matrix();
    let mut update = vec![0.0; n];
    for (i, (&bi, &w)) in system.rhs().iter().zip(system.row_norms_sq()).enumerate() {
        let row = a.row(i);
        axpy((bi - dot(x, row)) / w, row, &mut update);
    }
    let mut out = x.to_vec();
    axpy(lambda / n as f64, &update, &mut out);
    Ok(out)
}

/// Runs `steps` random reflections in place, calling `visit(k, x_k)` after
/// step `k` (1-based).
pub(crate) fn walk_reflections<F>(
    system: &LinearSystem,
    sampler: &RowSampler,
    x: &mut [f64],
    steps: usize,
    rng: &mut RngStream,
    mut visit: F,
) where
    F: FnMut(usize, &[f64]),
{
    let a = system.matrix();
    let (b, w) = (system.rhs(), system.row_norms_sq());
    for k in 1..=steps {
        let i = sampler.sample(rng);
        let row = a.row(i);
        let coef = 2.0 * (b[i] - dot(x, row)) / w[i];
        axpy(coef, row, x);
        visit(k, x);
    }
}

fn check_start(system: &LinearSystem, x1: &[f64]) -> Result<()> {
    if x1.len() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            got: x1.len(),
        });
    }
    Ok(())
}

/// Retained iterates of one reflection run.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionTrace {
    /// `points[j]` is the iterate after `j * thinning` steps.
    pub points: Vec<Vector>,
    pub thinning: usize,
    pub seed: u64,
}

impl ReflectionTrace {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest relative deviation of `||x_k - x*||` from `||x_1 - x*||`.
    pub fn max_relative_drift(&self, center: &[f64]) -> f64 {
        let Some(first) = self.points.first() else {
            return 0.0;
        };
        let r0 = distance(first, center);
        self.points
            .iter()
            .map(|p| (distance(p, center) - r0).abs() / r0.max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }

    /// CSV with header `step,coord_0,...,coord_{n-1}`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = self.points.first().map_or(0, Vec::len);
        let header: Vec<String> = std::iter::once("step".to_string())
            .chain((0..n).map(|j| format!("coord_{j}")))
            .collect();
        writeln!(out, "{}", header.join(","))?;
        for (j, p) in self.points.iter().enumerate() {
            write!(out, "{}", j * self.thinning)?;
            for x in p {
                write!(out, ",{}", crate::linalg::io::format_f64(*x))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Random reflection walk from `x1`, keeping `x1` and every `thinning`-th
/// iterate after it.
pub fn run_reflections(
    system: &LinearSystem,
    x1: &[f64],
    steps: usize,
    thinning: usize,
    rng: &mut RngStream,
) -> Result<ReflectionTrace> {
    if steps == 0 || thinning == 0 {
        return Err(Error::Config(
            "steps and thinning must both be at least 1".into(),
        ));
    }
    check_start(system, x1)?;
    let sampler = RowSampler::from_weights(system.row_norms_sq())?;
    let mut points = Vec::with_capacity(steps / thinning + 1);
    points.push(x1.to_vec());
    let mut x = x1.to_vec();
    walk_reflections(system, &sampler, &mut x, steps, rng, |k, xk| {
        if k % thinning == 0 {
            points.push(xk.to_vec());
        }
    });
    Ok(ReflectionTrace {
        points,
        thinning,
        seed: rng.seed(),
    })
}

/// Arithmetic mean of the retained points.
pub fn average_estimate(trace: &ReflectionTrace) -> Result<Vector> {
    mean_of_points(&trace.points)
}

pub(crate) fn mean_of_points(points: &[Vector]) -> Result<Vector> {
    let first = points.first().ok_or(Error::Empty("no points to average"))?;
    let mut sum = vec![0.0; first.len()];
    for p in points {
        if p.len() != sum.len() {
            return Err(Error::DimensionMismatch {
                expected: sum.len(),
                got: p.len(),
            });
        }
        axpy(1.0, p, &mut sum);
    }
    let m = points.len() as f64;
    Ok(sum.into_iter().map(|s| s / m).collect())
}

/// One restart epoch: walk `steps` reflections from `x` and return the mean of
/// the `steps + 1` visited points without storing them.
pub(crate) fn averaged_epoch(
    system: &LinearSystem,
    sampler: &RowSampler,
    x: &[f64],
    steps: usize,
    rng: &mut RngStream,
) -> Vector {
    let mut sum = x.to_vec();
    let mut cur = x.to_vec();
    walk_reflections(system, sampler, &mut cur, steps, rng, |_, xk| {
        axpy(1.0, xk, &mut sum)
    });
    let m = (steps + 1) as f64;
    sum.into_iter().map(|s| s / m).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartOutcome {
    pub solution: Vector,
    /// `||x_epoch - x*||` after each epoch, starting with the initial error,
    /// when the system carries a known solution.
    pub epoch_errors: Option<Vec<f64>>,
}

/// Repeatedly averages a reflection run and restarts from the average.
pub fn restarted_solve(
    system: &LinearSystem,
    x1: &[f64],
    steps_per_epoch: usize,
    epochs: usize,
    rng: &mut RngStream,
) -> Result<RestartOutcome> {
    if epochs == 0 || steps_per_epoch == 0 {
        return Err(Error::Config(
            "epochs and steps per epoch must both be at least 1".into(),
        ));
    }
    check_start(system, x1)?;
    let sampler = RowSampler::from_weights(system.row_norms_sq())?;
    let target = system.known_solution();
    let mut errors = target.map(|t| vec![distance(x1, t)]);
    let mut x = x1.to_vec();
    for _ in 0..epochs {
        x = averaged_epoch(system, &sampler, &x, steps_per_epoch, rng);
        if let (Some(errs), Some(t)) = (errors.as_mut(), target) {
            errs.push(distance(&x, t));
        }
    }
    Ok(RestartOutcome {
        solution: x,
        epoch_errors: errors,
    })
}

/// Restart epoch length `4 * ceil(||A||_F^2 ||A^-1||^2)`; with this many
/// steps the averaging bound contracts the error by about one half.
pub fn default_epoch_length(system: &LinearSystem) -> Result<usize> {
    Ok(4 * system.scaled_condition_sq()?.ceil() as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KaczmarzOutcome {
    pub solution: Vector,
    /// `||x_k - x*||^2` for `k = 0..=steps` when a known solution exists.
    pub squared_errors: Option<Vec<f64>>,
}

/// Randomized Kaczmarz with norm-squared row sampling.
pub fn randomized_kaczmarz_solve(
    system: &LinearSystem,
    x1: &[f64],
    steps: usize,
    rng: &mut RngStream,
) -> Result<KaczmarzOutcome> {
    if steps == 0 {
        return Err(Error::Config("steps must be at least 1".into()));
    }
    check_start(system, x1)?;
    let sampler = RowSampler::from_weights(system.row_norms_sq())?;
    let target = system.known_solution();
    let mut errors = target.map(|t| {
        let mut v = Vec::with_capacity(steps + 1);
        v.push(distance(x1, t).powi(2));
        v
    });
    let mut x = x1.to_vec();
    let a = system.matrix();
    let (b, w) = (system.rhs(), system.row_norms_sq());
    for _ in 0..steps {
        let i = sampler.sample(rng);
        let row = a.row(i);
        axpy((b[i] - dot(&x, row)) / w[i], row, &mut x);
        if let (Some(errs), Some(t)) = (errors.as_mut(), target) {
            errs.push(distance(&x, t).powi(2));
        }
    }
    Ok(KaczmarzOutcome {
        solution: x,
        squared_errors: errors,
    })
}
