//! Error of the running average against the averaging bound.

use rayon::prelude::*;
use serde::Serialize;

use super::ensemble::{gen_gaussian_row_normalized, planted_instance, StartRule};
use super::ExperimentConfig;
use crate::diagnostics::{prefix_mean_errors, PASS_SIGMAS};
use crate::error::{Error, Result};
use crate::linalg::vector::distance;
use crate::report::{CsvTable, Report};
use crate::rng::{mix_seed, RngStream};
use crate::sampling::RowSampler;
use crate::stats::Summary;
use crate::system::LinearSystem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateRow {
    pub m: usize,
    /// Mean over trials of `||x* - mean(x_1..x_m)||`.
    pub mean_error: f64,
    pub stderr: f64,
    /// `(1 + ||A||_F ||A^-1||) / sqrt(m) * ||x* - x1||`, averaged over trials.
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AveragingRateReport {
    pub experiment: &'static str,
    pub config: ExperimentConfig,
    /// `||A||_F ||A^-1||`
    pub scaled_condition: f64,
    pub rows: Vec<RateRow>,
}

impl Report for AveragingRateReport {
    fn to_csv(&self) -> String {
        let mut t = CsvTable::new(&["m", "mean_error", "stderr", "bound", "pass"]);
        for r in &self.rows {
            t.raw_row(&[
                r.m.to_string(),
                crate::report::num(r.mean_error),
                crate::report::num(r.stderr),
                crate::report::num(r.bound),
                r.pass.to_string(),
            ]);
        }
        t.finish()
    }
}

/// `1, 10, 100, ...` up to `max_m`, with `max_m` appended if it is not a
/// power of ten.
pub fn geometric_grid(max_m: usize) -> Vec<usize> {
    let mut grid = Vec::new();
    let mut m = 1usize;
    while m <= max_m {
        grid.push(m);
        match m.checked_mul(10) {
            Some(next) => m = next,
            None => break,
        }
    }
    if grid.last() != Some(&max_m) {
        grid.push(max_m);
    }
    grid
}

fn check_grid(grid: &[usize]) -> Result<()> {
    if grid.is_empty() || grid[0] == 0 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(
            "grid must be non-empty, strictly increasing, and start at 1 or later".into(),
        ));
    }
    Ok(())
}

fn rows_from(grid: &[usize], errors: &[Vec<f64>], bound_scale: &[f64]) -> Vec<RateRow> {
    let scale = Summary::of(bound_scale).mean;
    grid.iter()
        .enumerate()
        .map(|(j, &m)| {
            let at_m: Vec<f64> = errors.iter().map(|e| e[j]).collect();
            let s = Summary::of(&at_m);
            let bound = scale / (m as f64).sqrt();
            RateRow {
                m,
                mean_error: s.mean,
                stderr: s.stderr,
                bound,
                pass: s.mean <= bound + PASS_SIGMAS * s.stderr,
            }
        })
        .collect()
}

/// Rate table for one fixed system and start; trial `t` walks with
/// `RngStream::derived(seed, t)`.
pub fn averaging_rate_on(
    system: &LinearSystem,
    x1: &[f64],
    grid: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<RateRow>> {
    check_grid(grid)?;
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let target = system
        .known_solution()
        .ok_or_else(|| Error::Config("system has no known solution".into()))?;
    if x1.len() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            got: x1.len(),
        });
    }
    let sampler = RowSampler::from_weights(system.row_norms_sq())?;
    let errors: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = RngStream::derived(seed, t);
            prefix_mean_errors(system, &sampler, x1, target, grid, &mut rng)
        })
        .collect();
    let scale = (1.0 + system.scaled_condition_sq()?.sqrt()) * distance(x1, target);
    Ok(rows_from(grid, &errors, &[scale]))
}

/// One row-normalized Gaussian matrix of size `n`; every trial plants a new
/// solution and start at unit distance and averages a fresh walk. The grid
/// runs up to `steps`.
pub fn experiment_averaging_rate(config: &ExperimentConfig) -> Result<AveragingRateReport> {
    config.validate()?;
    let grid = geometric_grid(config.steps);
    let a = gen_gaussian_row_normalized(config.n, &mut RngStream::new(mix_seed(config.seed, 1)))?;
    let kappa = LinearSystem::new(a.clone(), vec![0.0; config.n])?
        .scaled_condition_sq()?
        .sqrt();
    let per_trial: Vec<(Vec<f64>, f64)> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = RngStream::derived(config.seed, t);
            let inst = planted_instance(a.clone(), StartRule::UniformDirection, &mut rng)?;
            let sampler = RowSampler::from_weights(inst.system.row_norms_sq())?;
            let errs = prefix_mean_errors(
                &inst.system,
                &sampler,
                &inst.x1,
                inst.solution(),
                &grid,
                &mut rng,
            );
            Ok((errs, (1.0 + kappa) * distance(&inst.x1, inst.solution())))
        })
        .collect::<Result<_>>()?;
    let (errors, scales): (Vec<_>, Vec<_>) = per_trial.into_iter().unzip();
    Ok(AveragingRateReport {
        experiment: "avg-rate",
        config: config.clone(),
        scaled_condition: kappa,
        rows: rows_from(&grid, &errors, &scales),
    })
}
