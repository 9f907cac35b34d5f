//! Registered solvers compared at equal row-touch budgets.

use rayon::prelude::*;
use serde::Serialize;

use super::ensemble::{gen_gaussian_row_normalized, planted_instance, StartRule};
use super::ExperimentConfig;
use crate::diagnostics::{kaczmarz_bound, PASS_SIGMAS};
use crate::error::{Error, Result};
use crate::linalg::vector::distance;
use crate::report::{num, CsvTable, Report};
use crate::rng::{mix_seed, RngStream};
use crate::solver::{SolveOptions, SolverRegistry};
use crate::stats::Summary;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompareOptions {
    /// Row touches per trial; rounded down to a multiple of `n`.
    pub budget: usize,
    /// Registry names; empty means every registered solver.
    pub methods: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodRow {
    pub method: String,
    /// Summed over all trials.
    pub row_touches: usize,
    pub final_error: Summary,
    pub squared_error: Summary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KaczmarzRateCheck {
    /// Trial mean of `(1 - 1/(||A||_F^2 ||A^-1||^2))^budget ||x1 - x*||^2`.
    pub bound: f64,
    pub mean_squared_error: f64,
    pub stderr: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodComparisonReport {
    pub experiment: &'static str,
    pub config: ExperimentConfig,
    pub budget: usize,
    pub methods: Vec<MethodRow>,
    pub kaczmarz_rate: Option<KaczmarzRateCheck>,
}

impl Report for MethodComparisonReport {
    fn to_csv(&self) -> String {
        let mut t = CsvTable::new(&[
            "method",
            "row_touches",
            "mean_error",
            "error_stderr",
            "mean_squared_error",
            "squared_error_stderr",
        ]);
        for r in &self.methods {
            t.raw_row(&[
                r.method.clone(),
                r.row_touches.to_string(),
                num(r.final_error.mean),
                num(r.final_error.stderr),
                num(r.squared_error.mean),
                num(r.squared_error.stderr),
            ]);
        }
        if let Some(k) = &self.kaczmarz_rate {
            t.raw_row(&[
                "kaczmarz-bound".into(),
                self.budget.to_string(),
                num(f64::NAN),
                num(f64::NAN),
                num(k.bound),
                num(f64::NAN),
            ]);
        }
        t.finish()
    }
}

struct Trial {
    /// Per method: (final error, row touches).
    results: Vec<(f64, usize)>,
    kaczmarz_bound: f64,
}

/// Each trial draws its own row-normalized Gaussian matrix and planted
/// solution; every method starts from the same point and gets its own RNG
/// stream.
pub fn experiment_method_comparison(
    config: &ExperimentConfig,
    options: &CompareOptions,
) -> Result<MethodComparisonReport> {
    config.validate()?;
    let registry = SolverRegistry::with_builtins();
    let names: Vec<String> = if options.methods.is_empty() {
        registry.names().into_iter().map(String::from).collect()
    } else {
        options.methods.clone()
    };
    let solvers = names
        .iter()
        .map(|n| registry.require(n))
        .collect::<Result<Vec<_>>>()?;
    let budget = options.budget / config.n * config.n;
    let solve_opts = SolveOptions {
        budget,
        tolerance: None,
    };

    let trials: Vec<Trial> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = RngStream::derived(config.seed, t);
            let a = gen_gaussian_row_normalized(config.n, &mut rng)?;
            let inst = planted_instance(a, StartRule::UniformDirection, &mut rng)?;
            let method_seed = mix_seed(config.seed, t);
            let results = solvers
                .iter()
                .enumerate()
                .map(|(j, s)| {
                    let mut r = RngStream::derived(method_seed, j as u64);
                    let out = s.solve(&inst.system, &inst.x1, &solve_opts, &mut r)?;
                    Ok((distance(&out.solution, inst.solution()), out.row_touches))
                })
                .collect::<Result<Vec<_>>>()?;
            let e0 = distance(&inst.x1, inst.solution()).powi(2);
            Ok(Trial {
                results,
                kaczmarz_bound: kaczmarz_bound(&inst.system, e0, budget)?,
            })
        })
        .collect::<Result<_>>()?;

    let methods: Vec<MethodRow> = names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let errs: Vec<f64> = trials.iter().map(|t| t.results[j].0).collect();
            let sq: Vec<f64> = errs.iter().map(|e| e * e).collect();
            MethodRow {
                method: name.clone(),
                row_touches: trials.iter().map(|t| t.results[j].1).sum(),
                final_error: Summary::of(&errs),
                squared_error: Summary::of(&sq),
            }
        })
        .collect();
    if let Some(first) = methods.first() {
        if let Some(bad) = methods.iter().find(|m| m.row_touches != first.row_touches) {
            return Err(Error::Config(format!(
                "row-touch mismatch: {} used {}, {} used {}",
                first.method, first.row_touches, bad.method, bad.row_touches
            )));
        }
    }
    let kaczmarz_rate = methods.iter().find(|m| m.method == "kaczmarz").map(|m| {
        let bounds: Vec<f64> = trials.iter().map(|t| t.kaczmarz_bound).collect();
        let bound = Summary::of(&bounds).mean;
        KaczmarzRateCheck {
            bound,
            mean_squared_error: m.squared_error.mean,
            stderr: m.squared_error.stderr,
            pass: m.squared_error.mean <= bound + PASS_SIGMAS * m.squared_error.stderr,
        }
    });
    Ok(MethodComparisonReport {
        experiment: "compare",
        config: config.clone(),
        budget,
        methods,
        kaczmarz_rate,
    })
}
