//! `crunch`: run GCS and the baselines, reproduce comparison tables and
//! fail-probability sweeps, and inspect the exp_well plateau.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

mod parse;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use crunch::harness::ExperimentSettings;
use crunch::{
    gcs_run, is_on_plateau, plateau_radius, run_baseline, run_comparison, run_failprob,
    write_trace_csv, BaselineConfig, GcsConfig, Method, Objective, ObjectiveKind, ObjectiveSpec,
    PrecisionModel, RunResult,
};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "crunch",
    version,
    about = "Gaussian Crunching Search and derivative-free baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one optimizer from one start point.
    Run(RunArgs),
    /// Compare methods over a list of start points.
    Bench(BenchArgs),
    /// Estimate GCS fail probabilities over seeded trials.
    Failprob(FailprobArgs),
    /// Report the plateau radius and classify points.
    Plateau(PlateauArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct ObjectiveArgs {
    /// exp_well, sphere or rosenbrock.
    #[arg(long, default_value = "exp_well", value_parser = parse::objective_kind)]
    objective: ObjectiveKind,
    #[arg(long, default_value_t = 15.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.05)]
    mu: f64,
}

impl ObjectiveArgs {
    fn spec(&self, dimension: usize) -> Result<ObjectiveSpec<f64>, CliError> {
        ObjectiveSpec {
            kind: self.objective,
            lambda: self.lambda,
            mu: self.mu,
            dimension,
        }
        .validated()
        .map_err(CliError::from)
    }
}

#[derive(Debug, Args)]
struct GcsArgs {
    /// Seed (base seed for bench/failprob).
    #[arg(long, env = "CRUNCH_SEED", default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    iters: u64,
    #[arg(long, default_value_t = 1.0)]
    initial_sd: f64,
    #[arg(long, default_value_t = 1.01)]
    growth: f64,
    #[arg(long, default_value_t = 1e300)]
    sd_limit: f64,
}

impl GcsArgs {
    fn config(&self) -> GcsConfig<f64> {
        GcsConfig {
            initial_sd: self.initial_sd,
            growth_factor: self.growth,
            max_iters: self.iters,
            sd_overflow_limit: self.sd_limit,
            seed: self.seed,
            record_trace: false,
        }
    }
}

#[derive(Debug, Args)]
struct BaselineArgs {
    #[arg(long, default_value_t = 10_000)]
    max_evals: u64,
    #[arg(long, default_value_t = 1e-8)]
    x_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    f_tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    fd_step: f64,
    #[arg(long, default_value_t = 0.05)]
    simplex_scale: f64,
}

impl BaselineArgs {
    fn config(&self) -> BaselineConfig<f64> {
        BaselineConfig {
            max_evals: self.max_evals,
            x_tol: self.x_tol,
            f_tol: self.f_tol,
            fd_step: self.fd_step,
            initial_simplex_scale: self.simplex_scale,
            ..BaselineConfig::default()
        }
    }
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    objective: ObjectiveArgs,
    #[arg(long, default_value = "600,600", value_parser = parse::point)]
    start: std::vec::Vec<f64>,
    #[arg(long, default_value = "gcs", value_parser = parse::method)]
    method: Method,
    #[command(flatten)]
    gcs: GcsArgs,
    #[command(flatten)]
    baseline: BaselineArgs,
    /// Write the per-iteration GCS trace as CSV to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    objective: ObjectiveArgs,
    /// `x,y;x,y;...` or a diagonal range `lo:hi:step`.
    #[arg(long, default_value = "200,200;400,400;600,600")]
    starts: String,
    /// Dimension of diagonal-range starts.
    #[arg(long, default_value_t = 2)]
    dimension: usize,
    #[arg(long, default_value = "gcs,nelder_mead,powell,fd_gradient_descent", value_parser = parse::methods)]
    methods: std::vec::Vec<Method>,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[command(flatten)]
    gcs: GcsArgs,
    #[command(flatten)]
    baseline: BaselineArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct FailprobArgs {
    #[command(flatten)]
    objective: ObjectiveArgs,
    #[arg(long, default_value = "600:2800:200")]
    starts: String,
    #[arg(long, default_value_t = 2)]
    dimension: usize,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Worker threads; the report does not depend on this.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..1025))]
    jobs: Option<u64>,
    #[command(flatten)]
    gcs: GcsArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct PlateauArgs {
    #[arg(long, default_value_t = 15.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.05)]
    mu: f64,
    /// Significand bits of the float format (24 or 53 for point checks).
    #[arg(long, default_value_t = 53)]
    bits: u32,
    /// Point to classify; repeatable.
    #[arg(long = "check", value_parser = parse::point)]
    checks: Vec<Vec<f64>>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<crunch::Error> for CliError {
    fn from(e: crunch::Error) -> Self {
        use crunch::Error as E;
        match e {
            E::DimensionMismatch { .. }
            | E::InvalidConfig(_)
            | E::UnsupportedObjective(_)
            | E::UnsupportedPrecision(_)
            | E::UnknownMethod { .. }
            | E::Empty(_) => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.into()),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Failprob(args) => cmd_failprob(args),
        Command::Plateau(args) => cmd_plateau(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn check_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(CliError::Usage(format!(
            "directory {} does not exist",
            dir.display()
        ))),
        _ => Ok(()),
    }
}

fn open_output(out: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json<T: Serialize>(out: &Option<PathBuf>, value: &T) -> Result<(), CliError> {
    let mut w = open_output(out)?;
    serde_json::to_writer_pretty(&mut w, value).context("writing JSON")?;
    writeln!(w).context("writing output")?;
    w.flush().context("writing output")?;
    Ok(())
}

fn parse_starts(s: &str, dimension: usize) -> Result<Vec<Vec<f64>>, CliError> {
    parse::starts(s, dimension).map_err(CliError::Usage)
}

fn common_dimension(starts: &[Vec<f64>]) -> Result<usize, CliError> {
    let dimension = starts[0].len();
    if starts.iter().any(|s| s.len() != dimension) {
        return Err(CliError::Usage(
            "all start points must have the same dimension".into(),
        ));
    }
    Ok(dimension)
}

/// Everything needed to replay a single run.
#[derive(Serialize)]
struct RunReport {
    objective: ObjectiveSpec<f64>,
    method: Method,
    start: std::vec::Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gcs: Option<GcsConfig<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    baseline: Option<BaselineConfig<f64>>,
    result: RunResult<f64>,
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    if let Some(out) = &args.output.out {
        check_parent(out)?;
    }
    if let Some(trace) = &args.trace {
        if args.method != Method::Gcs {
            return Err(CliError::Usage(
                "--trace is only available for --method gcs".into(),
            ));
        }
        check_parent(trace)?;
    }
    let objective = args.objective.spec(args.start.len())?;

    let (gcs, baseline, mut result) = match args.method.baseline() {
        None => {
            let config = args.gcs.config().with_trace(args.trace.is_some());
            let result = gcs_run(&objective, &args.start, &config)?;
            (Some(config), None, result)
        }
        Some(method) => {
            let config = args.baseline.config().with_method(method);
            let result = run_baseline(&objective, &args.start, &config)?;
            (None, Some(config), result)
        }
    };

    if let (Some(path), Some(trace)) = (&args.trace, result.trace.take()) {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_trace_csv(&trace, objective.dimension(), BufWriter::new(file))?;
    }

    let report = RunReport {
        objective,
        method: args.method,
        start: args.start,
        gcs,
        baseline,
        result,
    };
    match args.output.format {
        Format::Json => write_json(&args.output.out, &report),
        Format::Csv => {
            let mut w = open_output(&args.output.out)?;
            let r = &report.result;
            let mut header = vec![
                "method",
                "final_value",
                "evaluations",
                "accepted_count",
                "seed",
            ]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>();
            header.extend((0..r.best_point.len()).map(|i| format!("x{i}")));
            let mut row = vec![
                report.method.to_string(),
                r.best_value.to_string(),
                r.evaluations.to_string(),
                r.accepted_count.to_string(),
                r.seed.map(|s| s.to_string()).unwrap_or_default(),
            ];
            row.extend(r.best_point.iter().map(|x| x.to_string()));
            writeln!(w, "{}\n{}", header.join(","), row.join(",")).context("writing output")?;
            w.flush().context("writing output")?;
            Ok(())
        }
    }
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    if let Some(out) = &args.output.out {
        check_parent(out)?;
    }
    let starts = parse_starts(&args.starts, args.dimension)?;
    let objective = args.objective.spec(common_dimension(&starts)?)?;
    let settings = ExperimentSettings {
        gcs: args.gcs.config(),
        baseline: args.baseline.config(),
        threshold: args.threshold,
        base_seed: args.gcs.seed,
    };
    let report = run_comparison(&objective, &starts, &args.methods, &settings)?;
    match args.output.format {
        Format::Json => write_json(&args.output.out, &report),
        Format::Csv => {
            let w = open_output(&args.output.out)?;
            report.write_csv(w)?;
            Ok(())
        }
    }
}

fn cmd_failprob(args: FailprobArgs) -> Result<(), CliError> {
    if let Some(out) = &args.output.out {
        check_parent(out)?;
    }
    let starts = parse_starts(&args.starts, args.dimension)?;
    let objective = args.objective.spec(common_dimension(&starts)?)?;
    let jobs = args
        .jobs
        .map(|j| j as usize)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let report = run_failprob(
        &objective,
        &starts,
        args.trials,
        args.threshold,
        args.gcs.seed,
        &args.gcs.config(),
        jobs,
    )?;
    match args.output.format {
        Format::Json => write_json(&args.output.out, &report),
        Format::Csv => {
            let w = open_output(&args.output.out)?;
            report.write_csv(w)?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct PlateauCheck {
    point: Vec<f64>,
    value: f64,
    on_plateau: bool,
}

#[derive(Serialize)]
struct PlateauReport {
    objective: ObjectiveSpec<f64>,
    precision: PrecisionModel,
    radius: f64,
    checks: Vec<PlateauCheck>,
}

fn cmd_plateau(args: PlateauArgs) -> Result<(), CliError> {
    if let Some(out) = &args.output.out {
        check_parent(out)?;
    }
    let precision = PrecisionModel::new(args.bits)?;
    let dimension = args.checks.first().map_or(2, Vec::len);
    if args.checks.iter().any(|c| c.len() != dimension) {
        return Err(CliError::Usage(
            "all --check points must have the same dimension".into(),
        ));
    }
    let objective = ObjectiveSpec::exp_well(args.lambda, args.mu, dimension)?;
    let radius = plateau_radius(&objective, precision)?;

    let mut checks = Vec::with_capacity(args.checks.len());
    for point in args.checks {
        let on_plateau = is_on_plateau(&objective, &point, precision)?;
        let value = if precision == PrecisionModel::SINGLE {
            let narrow: Vec<f32> = point.iter().map(|&x| x as f32).collect();
            objective.cast::<f32>().evaluate(&narrow)? as f64
        } else {
            objective.evaluate(&point)?
        };
        checks.push(PlateauCheck {
            point,
            value,
            on_plateau,
        });
    }

    let report = PlateauReport {
        objective,
        precision,
        radius,
        checks,
    };
    match args.output.format {
        Format::Json => write_json(&args.output.out, &report),
        Format::Csv => {
            let mut w = open_output(&args.output.out)?;
            let mut header: Vec<String> = (0..dimension).map(|i| format!("x{i}")).collect();
            header.extend(["value", "on_plateau", "radius"].map(String::from));
            writeln!(w, "{}", header.join(",")).context("writing output")?;
            for c in &report.checks {
                let mut row: Vec<String> = c.point.iter().map(|x| x.to_string()).collect();
                row.push(c.value.to_string());
                row.push(c.on_plateau.to_string());
                row.push(report.radius.to_string());
                writeln!(w, "{}", row.join(",")).context("writing output")?;
            }
            w.flush().context("writing output")?;
            Ok(())
        }
    }
}
