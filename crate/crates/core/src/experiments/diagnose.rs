//! Full diagnostics suite on one random row-normalized matrix.

use serde::Serialize;
use serde_json::{json, Value};

use super::ensemble::{gen_gaussian_row_normalized, planted_instance, StartRule};
use crate::diagnostics::{
    averaging_bound_check, decorrelation_bound_check, expectation_identity_residual,
    expectation_operator, kaczmarz_bound_check, rayleigh_identity_check, retry_once,
    singular_mode_decay_check, small_mode_rayleigh_check, spectral_chain_check, MIN_TRIALS,
};
use crate::error::{Error, Result};
use crate::linalg::vector::norm_sq;
use crate::report::{CsvTable, Report};
use crate::rng::{mix_seed, RngStream};

/// Exact identities are compared at this absolute tolerance (scaled by
/// `||x||^2` where a probe vector is involved).
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticCheck {
    pub name: String,
    pub pass: bool,
    pub detail: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub experiment: &'static str,
    pub n: usize,
    pub seed: u64,
    pub trials: usize,
    pub all_pass: bool,
    pub checks: Vec<DiagnosticCheck>,
}

impl Report for DiagnosticsReport {
    fn to_csv(&self) -> String {
        let mut t = CsvTable::new(&["check", "pass"]);
        for c in &self.checks {
            t.raw_row(&[c.name.clone(), c.pass.to_string()]);
        }
        t.finish()
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Io(e.to_string()))
}

/// Runs every exact identity once and every Monte Carlo bound with
/// `trials` samples (at least 100). Failed Monte Carlo checks are retried
/// once with a derived seed.
pub fn run_diagnostics(n: usize, seed: u64, trials: usize) -> Result<DiagnosticsReport> {
    if n < 2 {
        return Err(Error::Config(format!("n must be at least 2, got {n}")));
    }
    if trials < MIN_TRIALS {
        return Err(Error::Config(format!(
            "diagnostics need at least {MIN_TRIALS} trials, got {trials}"
        )));
    }
    let mut rng = RngStream::derived(seed, 0);
    let a = gen_gaussian_row_normalized(n, &mut rng)?;
    let mut probes_rng = RngStream::derived(seed, 1);
    let probes: Vec<Vec<f64>> = (0..5).map(|_| probes_rng.gaussian_vector(n)).collect();
    let x = &probes[0];
    let mut checks = Vec::new();
    let mut push = |name: String, pass: bool, detail: Value| {
        checks.push(DiagnosticCheck { name, pass, detail });
    };

    let residuals = probes
        .iter()
        .map(|p| expectation_identity_residual(&a, p))
        .collect::<Result<Vec<_>>>()?;
    let worst = residuals.iter().cloned().fold(0.0, f64::max);
    push(
        "expectation-identity".into(),
        worst <= IDENTITY_TOL,
        json!({ "max_residual": worst, "probes": residuals.len(), "tolerance": IDENTITY_TOL }),
    );

    let sym = expectation_operator(&a)?.symmetry_defect();
    push(
        "expectation-operator-symmetric".into(),
        sym <= IDENTITY_TOL,
        json!({ "max_asymmetry": sym }),
    );

    for k in [1, 5, 20] {
        let r = singular_mode_decay_check(&a, x, k)?;
        push(
            format!("mode-decay-k{k}"),
            r.pass,
            json!({ "max_abs_error": r.max_abs_error, "tolerance": r.tolerance }),
        );
    }

    let ray = rayleigh_identity_check(&a, x)?;
    let ray_tol = IDENTITY_TOL * norm_sq(x).max(1.0);
    push(
        "rayleigh-identity".into(),
        ray <= ray_tol,
        json!({ "residual": ray, "tolerance": ray_tol }),
    );

    let chain = spectral_chain_check(&a)?;
    push("spectral-chain".into(), chain.pass, to_value(&chain)?);

    let eps = 1.0 / (2.0 * n as f64);
    match small_mode_rayleigh_check(&a, eps, &mut RngStream::derived(seed, 2))? {
        Some(c) => push("small-mode-rayleigh".into(), c.pass, to_value(&c)?),
        None => push(
            "small-mode-rayleigh".into(),
            true,
            json!({ "epsilon": eps, "modes_used": 0, "note": "no singular direction below threshold" }),
        ),
    }

    for k in [1, 3, 10] {
        let mut last = None;
        let (_, retried) = retry_once(mix_seed(seed, 10 + k as u64), |s| {
            let c = decorrelation_bound_check(&a, x, k, trials, &mut RngStream::new(s))?;
            // a failed agreement should also trigger the retry
            let mut b = c.bound;
            if !c.agrees {
                b.empirical_mean = f64::INFINITY;
            }
            last = Some(c);
            Ok(b)
        })?;
        let c = last.expect("ran at least once");
        let mut detail = to_value(&c)?;
        detail["retried"] = json!(retried);
        push(format!("decorrelation-k{k}"), c.pass(), detail);
    }

    let inst = planted_instance(
        a.clone(),
        StartRule::UniformDirection,
        &mut RngStream::derived(seed, 3),
    )?;
    for m in [1, 10, 100, 1000] {
        let (b, retried) = retry_once(mix_seed(seed, 100 + m as u64), |s| {
            averaging_bound_check(&inst.system, &inst.x1, m, trials, &mut RngStream::new(s))
        })?;
        let mut detail = to_value(&b)?;
        detail["retried"] = json!(retried);
        push(format!("averaging-bound-m{m}"), b.pass(), detail);
    }

    let ks = [10, 100, 1000];
    let mut first = kaczmarz_bound_check(
        &inst.system,
        &inst.x1,
        &ks,
        trials,
        &mut RngStream::new(mix_seed(seed, 200)),
    )?;
    let retried = !first.iter().all(|b| b.pass());
    if retried {
        first = kaczmarz_bound_check(
            &inst.system,
            &inst.x1,
            &ks,
            trials,
            &mut RngStream::new(mix_seed(mix_seed(seed, 200), 0x5EED)),
        )?;
    }
    for (k, b) in ks.iter().zip(&first) {
        let mut detail = to_value(b)?;
        detail["retried"] = json!(retried);
        push(format!("kaczmarz-bound-k{k}"), b.pass(), detail);
    }

    let all_pass = checks.iter().all(|c| c.pass);
    Ok(DiagnosticsReport {
        experiment: "diagnose",
        n,
        seed,
        trials,
        all_pass,
        checks,
    })
}
