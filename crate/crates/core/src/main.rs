use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hyperreflect::experiments::{
    experiment_averaging_rate, experiment_method_comparison, experiment_sphere_conditioning,
    run_diagnostics, CompareOptions, ExperimentConfig, SphereOptions, StartRule,
};
use hyperreflect::linalg::io::{read_matrix, read_vector};
use hyperreflect::reflection::run_reflections;
use hyperreflect::report::{num, render, write_output, CsvTable, Report, ReportFormat};
use hyperreflect::solver::{SolveOptions, SolverRegistry};
use hyperreflect::{Error, LinearSystem, Result, RngStream};

#[derive(Parser, Debug)]
#[command(
    name = "hyperreflect",
    version,
    about = "Random hyperplane reflections for linear systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve A x = b read from text files with a registered method.
    Solve(SolveArgs),
    /// Conditioning of A versus the chord matrix of a reflection trace.
    SphereCond(SphereArgs),
    /// Running-average error against the averaging bound.
    AvgRate(RateArgs),
    /// Registered methods at equal row-touch budgets.
    Compare(CompareArgs),
    /// Exact identities and Monte Carlo bounds on one random matrix.
    Diagnose(DiagnoseArgs),
}

#[derive(Args, Debug, Clone)]
struct Output {
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::Json => ReportFormat::Json,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Start {
    OriginRay,
    UniformDirection,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    matrix_file: PathBuf,
    #[arg(long)]
    rhs_file: PathBuf,
    /// reflect-average, kaczmarz, cimmino-1 or cimmino-2.
    #[arg(long, default_value = "reflect-average")]
    method: String,
    /// Row-touch budget.
    #[arg(long, default_value_t = 1_000_000)]
    steps: usize,
    /// Stop once ||Ax - b|| <= tol * max(||b||, 1).
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Also write a thinned raw reflection trace (CSV) from the zero vector.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    thin: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct SphereArgs {
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    matrices: usize,
    #[arg(long, default_value_t = 5000)]
    steps: usize,
    #[arg(long, default_value_t = 25)]
    thin: usize,
    /// Run 1000 matrices (overrides --matrices).
    #[arg(long)]
    full_scale: bool,
    #[arg(long, value_enum, default_value_t = Start::OriginRay)]
    start: Start,
    /// Center estimator scored against the planted solution: thales or average.
    #[arg(long, default_value = "thales")]
    estimator: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct RateArgs {
    #[arg(long, default_value_t = 20)]
    n: usize,
    /// Largest m on the grid 1, 10, 100, ...
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long, default_value_t = 30)]
    n: usize,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    /// Row touches per trial, rounded down to a multiple of n.
    #[arg(long, default_value_t = 100_000)]
    budget: usize,
    /// Comma-separated method names; all registered methods by default.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<String>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct DiagnoseArgs {
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[command(flatten)]
    output: Output,
}

const DEFAULT_SEED: u64 = 7;

fn config(
    n: usize,
    matrices: usize,
    steps: usize,
    thin: usize,
    trials: usize,
    o: &Output,
) -> ExperimentConfig {
    ExperimentConfig {
        n,
        num_matrices: matrices,
        steps,
        thinning: thin,
        trials,
        seed: o.seed.unwrap_or(DEFAULT_SEED),
        output_path: o.out.clone(),
        format: o.format.into(),
    }
}

fn emit<R: Report>(report: &R, o: &Output) -> Result<()> {
    write_output(&render(report, o.format.into())?, o.out.as_deref())
}

#[derive(Debug, Serialize)]
struct SolveReport {
    method: String,
    seed: u64,
    converged: bool,
    row_touches: usize,
    residual_norm: f64,
    solution: Vec<f64>,
}

impl Report for SolveReport {
    fn to_csv(&self) -> String {
        let mut t = CsvTable::new(&["index", "value"]);
        for (i, v) in self.solution.iter().enumerate() {
            t.raw_row(&[i.to_string(), num(*v)]);
        }
        t.finish()
    }
}

fn run_solve(args: &SolveArgs) -> Result<bool> {
    let a = read_matrix(&args.matrix_file)?;
    let b = read_vector(&args.rhs_file)?;
    // shape problems in the input files are configuration errors
    let system = LinearSystem::new(a, b).map_err(|e| Error::Config(e.to_string()))?;
    let registry = SolverRegistry::with_builtins();
    let solver = registry.require(&args.method)?;
    let seed = args.output.seed.unwrap_or(DEFAULT_SEED);
    let x1 = vec![0.0; system.dim()];
    let outcome = solver.solve(
        &system,
        &x1,
        &SolveOptions {
            budget: args.steps,
            tolerance: Some(args.tol),
        },
        &mut RngStream::new(seed),
    )?;
    if let Some(path) = &args.trace_out {
        if args.thin == 0 {
            return Err(Error::Config("thin must be at least 1".into()));
        }
        let trace = run_reflections(
            &system,
            &x1,
            args.steps,
            args.thin,
            &mut RngStream::derived(seed, 1),
        )?;
        let file = std::fs::File::create(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        trace.write_csv(std::io::BufWriter::new(file))?;
    }
    let report = SolveReport {
        method: solver.name().to_string(),
        seed,
        converged: outcome.converged,
        row_touches: outcome.row_touches,
        residual_norm: system.residual_norm(&outcome.solution)?,
        solution: outcome.solution,
    };
    emit(&report, &args.output)?;
    if !report.converged {
        eprintln!(
            "warning: {} did not reach tolerance {} within {} row touches",
            report.method, args.tol, args.steps
        );
    }
    Ok(report.converged)
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Solve(a) => run_solve(a),
        Command::SphereCond(a) => {
            let matrices = if a.full_scale { 1000 } else { a.matrices };
            let c = config(a.n, matrices, a.steps, a.thin, 1, &a.output);
            let opts = SphereOptions {
                start_rule: match a.start {
                    Start::OriginRay => StartRule::OriginRay,
                    Start::UniformDirection => StartRule::UniformDirection,
                },
                estimator: a.estimator.clone(),
            };
            let r = experiment_sphere_conditioning(&c, &opts)?;
            emit(&r, &a.output)?;
            Ok(!r.records.is_empty())
        }
        Command::AvgRate(a) => {
            let c = config(a.n, 1, a.steps, 1, a.trials, &a.output);
            let r = experiment_averaging_rate(&c)?;
            emit(&r, &a.output)?;
            Ok(r.rows.iter().all(|row| row.pass))
        }
        Command::Compare(a) => {
            let c = config(a.n, 1, a.budget.max(1), 1, a.trials, &a.output);
            let r = experiment_method_comparison(
                &c,
                &CompareOptions {
                    budget: a.budget,
                    methods: a.methods.clone(),
                },
            )?;
            emit(&r, &a.output)?;
            Ok(r.kaczmarz_rate.is_none_or(|k| k.pass))
        }
        Command::Diagnose(a) => {
            let r = run_diagnostics(a.n, a.output.seed.unwrap_or(DEFAULT_SEED), a.trials)?;
            emit(&r, &a.output)?;
            for c in r.checks.iter().filter(|c| !c.pass) {
                eprintln!("check failed: {}", c.name);
            }
            Ok(r.all_pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
