//! Interchangeable iterative solvers, registered by name.
//!
//! Every solver is charged in *row touches*: one inner product with one row
//! of `A`. A reflection or Kaczmarz step costs one touch, a Cimmino step
//! costs `n`. Running each solver with the same budget therefore compares
//! them at equal work.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::vector::{norm, Vector};
use crate::reflection::{averaged_epoch, cimmino_step, default_epoch_length};
use crate::rng::RngStream;
use crate::sampling::RowSampler;
use crate::system::LinearSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Maximum number of row touches.
    pub budget: usize,
    /// Stop early once `||Ax - b|| <= tolerance * max(||b||, 1)`.
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub solution: Vector,
    pub row_touches: usize,
    pub converged: bool,
}

pub trait Solver: Send + Sync {
    fn name(&self) -> &str;

    fn description(&self) -> &str;

    fn solve(
        &self,
        system: &LinearSystem,
        x1: &[f64],
        options: &SolveOptions,
        rng: &mut RngStream,
    ) -> Result<SolveOutcome>;
}

fn start(system: &LinearSystem, x1: &[f64]) -> Result<Vector> {
    if x1.len() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            got: x1.len(),
        });
    }
    Ok(x1.to_vec())
}

fn within_tolerance(system: &LinearSystem, x: &[f64], tol: Option<f64>) -> Result<bool> {
    match tol {
        None => Ok(false),
        Some(t) => Ok(system.residual_norm(x)? <= t * norm(system.rhs()).max(1.0)),
    }
}

/// Restarted reflection averaging. The budget is spent in epochs of
/// `epoch_length` reflections (a final shorter epoch takes the remainder);
/// after each epoch the walk restarts from the epoch average.
#[derive(Debug, Clone, Default)]
pub struct ReflectionAveraging {
    /// Defaults to `4 * ceil(||A||_F^2 ||A^-1||^2)`.
    pub epoch_length: Option<usize>,
}

impl Solver for ReflectionAveraging {
    fn name(&self) -> &str {
        "reflect-average"
    }

    fn description(&self) -> &str {
        "random hyperplane reflections, averaged and restarted each epoch"
    }

    fn solve(
        &self,
        system: &LinearSystem,
        x1: &[f64],
        options: &SolveOptions,
        rng: &mut RngStream,
    ) -> Result<SolveOutcome> {
        let mut x = start(system, x1)?;
        let epoch = match self.epoch_length {
            Some(0) => return Err(Error::Config("epoch length must be positive".into())),
            Some(l) => l,
            None => default_epoch_length(system)?,
        };
        let sampler = RowSampler::from_weights(system.row_norms_sq())?;
        let mut touches = 0;
        let mut converged = within_tolerance(system, &x, options.tolerance)?;
        while !converged && touches < options.budget {
            let steps = epoch.min(options.budget - touches);
            x = averaged_epoch(system, &sampler, &x, steps, rng);
            touches += steps;
            converged = within_tolerance(system, &x, options.tolerance)?;
        }
        Ok(SolveOutcome {
            solution: x,
            row_touches: touches,
            converged,
        })
    }
}

/// Randomized Kaczmarz: project onto one norm-squared-sampled row per step.
#[derive(Debug, Clone, Default)]
pub struct RandomizedKaczmarz;

impl Solver for RandomizedKaczmarz {
    fn name(&self) -> &str {
        "kaczmarz"
    }

    fn description(&self) -> &str {
        "randomized Kaczmarz projections with norm-squared row sampling"
    }

    fn solve(
        &self,
        system: &LinearSystem,
        x1: &[f64],
        options: &SolveOptions,
        rng: &mut RngStream,
    ) -> Result<SolveOutcome> {
        let mut x = start(system, x1)?;
        let n = system.dim();
        let sampler = RowSampler::from_weights(system.row_norms_sq())?;
        let a = system.matrix();
        let (b, w) = (system.rhs(), system.row_norms_sq());
        let mut touches = 0;
        let mut converged = within_tolerance(system, &x, options.tolerance)?;
        while !converged && touches < options.budget {
            let i = sampler.sample(rng);
            let row = a.row(i);
            let coef = (b[i] - crate::linalg::vector::dot(&x, row)) / w[i];
            crate::linalg::vector::axpy(coef, row, &mut x);
            touches += 1;
            if touches % n == 0 {
                converged = within_tolerance(system, &x, options.tolerance)?;
            }
        }
        if !converged {
            converged = within_tolerance(system, &x, options.tolerance)?;
        }
        Ok(SolveOutcome {
            solution: x,
            row_touches: touches,
            converged,
        })
    }
}

/// Cimmino's simultaneous method with relaxation `lambda`; each step touches
/// all `n` rows, so only whole multiples of `n` of the budget are used.
#[derive(Debug, Clone)]
pub struct Cimmino {
    pub lambda: f64,
    name: String,
}

impl Cimmino {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            name: format!("cimmino-{lambda}"),
        }
    }
}

impl Solver for Cimmino {
    fn name(&self) -> &str {
        &self.name
    }

    fn description(&self) -> &str {
        "Cimmino averaged row updates (lambda = 2 averages all reflections)"
    }

    fn solve(
        &self,
        system: &LinearSystem,
        x1: &[f64],
        options: &SolveOptions,
        _rng: &mut RngStream,
    ) -> Result<SolveOutcome> {
        let mut x = start(system, x1)?;
        let n = system.dim();
        let mut touches = 0;
        let mut converged = within_tolerance(system, &x, options.tolerance)?;
        while !converged && touches + n <= options.budget {
            x = cimmino_step(&x, system, self.lambda)?;
            touches += n;
            converged = within_tolerance(system, &x, options.tolerance)?;
        }
        Ok(SolveOutcome {
            solution: x,
            row_touches: touches,
            converged,
        })
    }
}

/// Name-keyed solver table. Iteration order is alphabetical so anything
/// built by walking the registry is deterministic.
#[derive(Default)]
pub struct SolverRegistry {
    solvers: BTreeMap<String, Box<dyn Solver>>,
}

impl std::fmt::Debug for SolverRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.solvers.keys()).finish()
    }
}

impl SolverRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// `reflect-average`, `kaczmarz`, `cimmino-1`, `cimmino-2`.
    pub fn with_builtins() -> Self {
        let mut r = Self::new();
        r.register(Box::new(ReflectionAveraging::default()));
        r.register(Box::new(RandomizedKaczmarz));
        r.register(Box::new(Cimmino::new(1.0)));
        r.register(Box::new(Cimmino::new(2.0)));
        r
    }

    /// Replaces any solver already registered under the same name.
    pub fn register(&mut self, solver: Box<dyn Solver>) {
        self.solvers.insert(solver.name().to_string(), solver);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Solver> {
        self.solvers.get(name).map(|b| b.as_ref())
    }

    pub fn require(&self, name: &str) -> Result<&dyn Solver> {
        self.get(name).ok_or_else(|| {
            Error::Config(format!(
                "unknown method '{name}' (available: {})",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&str> {
        self.solvers.keys().map(String::as_str).collect()
    }
}
