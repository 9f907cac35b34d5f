//! Conditioning of `A` versus the Thales chord matrix `B` built from a
//! thinned reflection trace.

use rayon::prelude::*;
use serde::Serialize;

use super::ensemble::{gen_gaussian_row_normalized, planted_instance, StartRule};
use super::ExperimentConfig;
use crate::error::{Error, Result};
use crate::linalg::svd::singular_values;
use crate::linalg::vector::distance;
use crate::reflection::run_reflections;
use crate::report::{num, CsvTable, Report};
use crate::rng::RngStream;
use crate::sphere::{build_thales_system, conditioning_from_svd, EstimatorRegistry, PointCloud};
use crate::stats::Summary;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SphereOptions {
    pub start_rule: StartRule,
    /// Registry name of the center estimator whose error is recorded.
    pub estimator: String,
}

impl Default for SphereOptions {
    fn default() -> Self {
        Self {
            start_rule: StartRule::OriginRay,
            estimator: "thales".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereRecord {
    pub matrix: usize,
    /// `1 / (||A^-1|| ||A||_F)`
    pub inv_scaled_cond_a: f64,
    /// `1 / (||B^-1|| ||B||_F)`
    pub inv_scaled_cond_b: f64,
    pub cond_a: f64,
    pub cond_b: f64,
    /// `||center estimate - x*||`
    pub center_error: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedMatrix {
    pub matrix: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereAggregates {
    pub inv_scaled_cond_a: Summary,
    pub inv_scaled_cond_b: Summary,
    pub cond_a: Summary,
    pub cond_b: Summary,
    pub center_error: Summary,
}

impl SphereAggregates {
    pub fn of(records: &[SphereRecord]) -> Self {
        let col =
            |f: fn(&SphereRecord) -> f64| Summary::of(&records.iter().map(f).collect::<Vec<_>>());
        Self {
            inv_scaled_cond_a: col(|r| r.inv_scaled_cond_a),
            inv_scaled_cond_b: col(|r| r.inv_scaled_cond_b),
            cond_a: col(|r| r.cond_a),
            cond_b: col(|r| r.cond_b),
            center_error: col(|r| r.center_error),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereConditioningReport {
    pub experiment: &'static str,
    pub config: ExperimentConfig,
    pub retained_points: usize,
    pub start_rule: StartRule,
    pub start_rule_description: &'static str,
    pub estimator: String,
    pub aggregates: SphereAggregates,
    pub skipped: Vec<SkippedMatrix>,
    pub records: Vec<SphereRecord>,
}

impl Report for SphereConditioningReport {
    fn to_csv(&self) -> String {
        let mut t = CsvTable::new(&[
            "matrix",
            "inv_scaled_cond_a",
            "inv_scaled_cond_b",
            "cond_a",
            "cond_b",
            "center_error",
        ]);
        for r in &self.records {
            t.row(
                r.matrix,
                &[
                    r.inv_scaled_cond_a,
                    r.inv_scaled_cond_b,
                    r.cond_a,
                    r.cond_b,
                    r.center_error,
                ],
            );
        }
        let g = &self.aggregates;
        let all = [
            g.inv_scaled_cond_a,
            g.inv_scaled_cond_b,
            g.cond_a,
            g.cond_b,
            g.center_error,
        ];
        t.row("mean", &all.map(|s| s.mean));
        t.row("stderr", &all.map(|s| s.stderr));
        for s in &self.skipped {
            t.raw_row(&[
                format!("skipped:{}", s.matrix),
                num(f64::NAN),
                num(f64::NAN),
                num(f64::NAN),
                num(f64::NAN),
                num(f64::NAN),
            ]);
        }
        t.finish()
    }
}

enum Outcome {
    Kept(SphereRecord),
    Skipped(SkippedMatrix),
}

fn one_matrix(
    index: usize,
    config: &ExperimentConfig,
    options: &SphereOptions,
    registry: &EstimatorRegistry,
) -> Result<Outcome> {
    let mut rng = RngStream::derived(config.seed, index as u64);
    let a = gen_gaussian_row_normalized(config.n, &mut rng)?;
    let skip = |reason: String| {
        Ok(Outcome::Skipped(SkippedMatrix {
            matrix: index,
            reason,
        }))
    };
    let cond_a = match conditioning_from_svd(&singular_values(&a)?) {
        Ok(c) => c,
        Err(e @ Error::Singular { .. }) => return skip(e.to_string()),
        Err(e) => return Err(e),
    };
    let inst = match planted_instance(a, options.start_rule, &mut rng) {
        Ok(i) => i,
        Err(e @ Error::Singular { .. }) => return skip(e.to_string()),
        Err(e) => return Err(e),
    };
    let trace = run_reflections(
        &inst.system,
        &inst.x1,
        config.steps,
        config.thinning,
        &mut rng,
    )?;
    let cloud = PointCloud::new(trace.points)?;
    let thales = build_thales_system(&cloud)?;
    let cond_b = match conditioning_from_svd(&singular_values(&thales.b)?) {
        Ok(c) => c,
        Err(e @ Error::Singular { .. }) => return skip(e.to_string()),
        Err(e) => return Err(e),
    };
    let center = match registry.require(&options.estimator)?.estimate(&cloud) {
        Ok(c) => c,
        Err(e @ (Error::Singular { .. } | Error::DegenerateCloud(_))) => {
            return skip(e.to_string())
        }
        Err(e) => return Err(e),
    };
    Ok(Outcome::Kept(SphereRecord {
        matrix: index,
        inv_scaled_cond_a: cond_a.inverse_scaled_condition,
        inv_scaled_cond_b: cond_b.inverse_scaled_condition,
        cond_a: cond_a.condition_number,
        cond_b: cond_b.condition_number,
        center_error: distance(&center, inst.solution()),
    }))
}

/// For each matrix: draw a row-normalized Gaussian `A`, plant a solution,
/// walk `steps` reflections, keep every `thinning`-th point, and compare the
/// conditioning of `A` with that of the chord matrix `B`. Matrices whose
/// cloud is degenerate are skipped and listed.
pub fn experiment_sphere_conditioning(
    config: &ExperimentConfig,
    options: &SphereOptions,
) -> Result<SphereConditioningReport> {
    config.validate_for_sphere()?;
    let registry = EstimatorRegistry::with_builtins();
    registry.require(&options.estimator)?;
    let outcomes: Vec<Outcome> = (0..config.num_matrices)
        .into_par_iter()
        .map(|i| one_matrix(i, config, options, &registry))
        .collect::<Result<_>>()?;
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Kept(r) => records.push(r),
            Outcome::Skipped(s) => skipped.push(s),
        }
    }
    Ok(SphereConditioningReport {
        experiment: "sphere-cond",
        config: config.clone(),
        retained_points: config.steps / config.thinning + 1,
        start_rule: options.start_rule,
        start_rule_description: options.start_rule.describe(),
        estimator: options.estimator.clone(),
        aggregates: SphereAggregates::of(&records),
        skipped,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(n: usize, matrices: usize, steps: usize, thinning: usize) -> ExperimentConfig {
        ExperimentConfig {
            n,
            num_matrices: matrices,
            steps,
            thinning,
            ..ExperimentConfig::sphere_defaults()
        }
    }

    #[test]
    fn circle_instance_recovers_center() {
        for rule in [StartRule::OriginRay, StartRule::UniformDirection] {
            let opts = SphereOptions {
                start_rule: rule,
                ..Default::default()
            };
            let rep = experiment_sphere_conditioning(&small(2, 5, 10, 1), &opts).unwrap();
            assert_eq!(rep.records.len() + rep.skipped.len(), 5);
            assert_eq!(rep.retained_points, 11);
            for r in &rep.records {
                assert!(r.center_error <= 1e-8, "{r:?}");
            }
        }
    }

    #[test]
    fn aggregates_match_records() {
        let rep = experiment_sphere_conditioning(&small(8, 6, 200, 5), &SphereOptions::default())
            .unwrap();
        let n = rep.records.len() as f64;
        let mean_b = rep.records.iter().map(|r| r.inv_scaled_cond_b).sum::<f64>() / n;
        let mean_a = rep.records.iter().map(|r| r.inv_scaled_cond_a).sum::<f64>() / n;
        assert!((rep.aggregates.inv_scaled_cond_b.mean - mean_b).abs() <= 1e-12);
        assert!((rep.aggregates.inv_scaled_cond_a.mean - mean_a).abs() <= 1e-12);
    }

    #[test]
    fn deterministic_and_csv_has_summary_rows() {
        let c = small(5, 4, 60, 3);
        let a = experiment_sphere_conditioning(&c, &SphereOptions::default()).unwrap();
        let b = experiment_sphere_conditioning(&c, &SphereOptions::default()).unwrap();
        assert_eq!(a, b);
        let csv = a.to_csv();
        assert!(csv.starts_with("matrix,inv_scaled_cond_a"));
        assert!(csv.contains("\nmean,") && csv.contains("\nstderr,"));
    }

    #[test]
    fn too_few_points_rejected() {
        let err = experiment_sphere_conditioning(&small(10, 1, 20, 5), &SphereOptions::default());
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn unknown_estimator_rejected() {
        let opts = SphereOptions {
            estimator: "median".into(),
            ..Default::default()
        };
        assert!(experiment_sphere_conditioning(&small(3, 1, 10, 1), &opts).is_err());
    }
}
