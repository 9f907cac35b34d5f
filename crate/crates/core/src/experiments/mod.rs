//! Reproducible experiment drivers behind the CLI subcommands.
//!
//! Every driver fans out over independent units (matrices or trials). Unit
//! `i` draws from `RngStream::derived(seed, i)` and results are gathered in
//! index order, so reports do not depend on thread scheduling.

pub mod compare;
pub mod diagnose;
pub mod ensemble;
pub mod rate;
pub mod sphere_cond;

use std::path::PathBuf;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::ReportFormat;

pub use compare::{experiment_method_comparison, CompareOptions, MethodComparisonReport};
pub use diagnose::{run_diagnostics, DiagnosticsReport};
pub use ensemble::{gen_gaussian_row_normalized, planted_instance, StartRule};
pub use rate::{averaging_rate_on, experiment_averaging_rate, AveragingRateReport, RateRow};
pub use sphere_cond::{experiment_sphere_conditioning, SphereConditioningReport, SphereOptions};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub num_matrices: usize,
    pub steps: usize,
    pub thinning: usize,
    pub trials: usize,
    pub seed: u64,
    #[serde(skip)]
    pub output_path: Option<PathBuf>,
    #[serde(skip)]
    pub format: ReportFormat,
}

impl ExperimentConfig {
    /// Desk-scale sphere conditioning defaults: 100 matrices of size 50,
    /// 5000 reflections kept every 25 steps.
    pub fn sphere_defaults() -> Self {
        Self {
            n: 50,
            num_matrices: 100,
            steps: 5000,
            thinning: 25,
            trials: 1,
            seed: 7,
            output_path: None,
            format: ReportFormat::Json,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!(
                "n must be at least 2, got {}",
                self.n
            )));
        }
        for (name, v) in [
            ("matrices", self.num_matrices),
            ("steps", self.steps),
            ("thin", self.thinning),
            ("trials", self.trials),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    /// Sphere experiments need at least `n + 1` retained points.
    pub fn validate_for_sphere(&self) -> Result<()> {
        self.validate()?;
        let kept = self.steps / self.thinning + 1;
        if kept < self.n + 1 {
            return Err(Error::Config(format!(
                "steps/thin keeps {kept} points; need at least n+1 = {}",
                self.n + 1
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let mut c = ExperimentConfig::sphere_defaults();
        assert!(c.validate_for_sphere().is_ok());
        c.thinning = 200;
        assert!(c.validate_for_sphere().is_err());
        c.thinning = 25;
        c.trials = 0;
        assert!(c.validate().is_err());
        c.trials = 1;
        c.n = 1;
        assert!(c.validate().is_err());
    }
}
