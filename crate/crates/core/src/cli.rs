//! `lassolab` command line. Exit codes are the only status channel:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | input or usage error |
//! | 2 | iteration cap reached before convergence (`fit`) |
//! | 3 | insertion-only path could not be continued (`path`) |
//! | 4 | a convergence bound was violated (`bench --check-bounds`, `repro`) |

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::csvio::{self, fmt_real};
use crate::datagen::{gen_linear, lasso_instance, GenSpec};
use crate::error::{Error, Result};
use crate::pathwise::{
    self, build_counter_example, eval_path_at, reproduce_counter_example, solve_lars, solve_path,
    CounterExampleReport, FailureReason, InsertionFailure, PathMode, PathOptions, PathStatus,
    RegPath,
};
use crate::problem::{surrogate_phi, LassoProblem, SurrogateParams};
use crate::solvers::{solve_cgda, solve_fista, solve_ista, solve_sla, IterateTrace, SolverConfig};
use crate::verify::{bench_run, BenchConfig, BenchResult, SolverSpec, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_MAX_ITERS: i32 = 2;
pub const EXIT_FAILED_INSERTION: i32 = 3;
pub const EXIT_BOUND_VIOLATED: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "lassolab",
    version,
    about = "Lasso solvers, regularization paths and convergence checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit one lambda and print `feature,coefficient` to stdout.
    Fit(FitArgs),
    /// Compute the regularization path and write its segment table.
    Path(PathArgs),
    /// Run several solvers for a fixed number of iterations.
    Bench(BenchArgs),
    /// Generate a synthetic dataset.
    Gen(GenArgs),
    /// Write plot-ready data for the convergence, path and surrogate studies.
    Repro(ReproArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FitAlgo {
    Ista,
    Fista,
    Cgda,
    Sla,
    Pfa,
    Lars,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    lambda: f64,
    #[arg(long, value_enum)]
    algo: FitAlgo,
    /// Smoothing sharpness, required for `sla`.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    /// Stop when the KKT residual (SLA: smoothed gradient norm) is this small.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Per-iteration CSV `k,objective,kkt,elapsed_ns`.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CliPathMode {
    Full,
    InsertionOnly,
}

#[derive(Debug, Args)]
struct PathArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    min_lambda: f64,
    #[arg(long, value_enum, default_value_t = CliPathMode::Full)]
    mode: CliPathMode,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BenchAlgo {
    Ista,
    Fista,
    Cgda,
    Sla,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    lambda: f64,
    /// Comma-separated subset of ista,fista,cgda,sla.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    algos: Vec<BenchAlgo>,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    /// Trace table `algo,k,objective,gap,bound_rhs`.
    #[arg(long)]
    out: PathBuf,
    /// Exit 4 when any solver breaks its convergence bound.
    #[arg(long)]
    check_bounds: bool,
    /// Smoothing sharpness for `sla`.
    #[arg(long, default_value_t = 200.0)]
    alpha: f64,
    /// Multiply the ISTA step by this factor (values above 2 break descent).
    #[arg(long)]
    oversized_step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    Random,
    Counterexample,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    preset: Preset,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    /// Nonzero coefficients (`random` only).
    #[arg(long, default_value_t = 5)]
    sparsity: usize,
    /// Noise level (`random` only).
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long)]
    seed: u64,
    /// Scale predictors to unit norm (`random` only).
    #[arg(long)]
    standardize: bool,
    /// `b1,b2,b3` for the counterexample preset.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = pathwise::DEFAULT_BETAS)]
    betas: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Figure {
    Convergence,
    Counterexample,
    Surrogate,
}

#[derive(Debug, Args)]
struct ReproArgs {
    #[arg(long, value_enum)]
    paper_figure: Figure,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Seed for the counterexample and convergence instances.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of features for the counterexample.
    #[arg(long, default_value_t = 6)]
    p: usize,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Fit(a) => cmd_fit(&a),
        Command::Path(a) => cmd_path(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Gen(a) => cmd_gen(&a),
        Command::Repro(a) => cmd_repro(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn load_problem(path: &Path, lambda: f64) -> Result<(csvio::Dataset, LassoProblem)> {
    let data = csvio::read_dataset(path)?;
    let problem = LassoProblem::new(data.x.clone(), data.y.clone(), lambda)?;
    Ok((data, problem))
}

fn write_trace(path: &Path, trace: &IterateTrace) -> Result<()> {
    let rows: Vec<Vec<String>> = trace
        .records
        .iter()
        .map(|r| {
            vec![
                r.k.to_string(),
                fmt_real(r.objective),
                r.kkt.map_or_else(String::new, fmt_real),
                r.elapsed.as_nanos().to_string(),
            ]
        })
        .collect();
    csvio::write_table(
        create(path)?,
        &["k", "objective", "kkt", "elapsed_ns"],
        &rows,
    )
}

fn cmd_fit(a: &FitArgs) -> Result<i32> {
    if a.algo == FitAlgo::Sla && a.alpha.is_none() {
        return Err(Error::InvalidParameter(
            "--algo sla requires --alpha".into(),
        ));
    }
    let (data, problem) = load_problem(&a.data, a.lambda)?;
    let cfg = SolverConfig {
        max_iters: a.max_iters,
        gap_tol: a.tol,
        ..Default::default()
    };
    let iterative = |trace: IterateTrace| -> Result<(Vec<f64>, i32)> {
        if let Some(path) = &a.trace {
            write_trace(path, &trace)?;
        }
        let code = if trace.status.converged() {
            EXIT_OK
        } else {
            EXIT_MAX_ITERS
        };
        Ok((trace.final_beta().to_vec(), code))
    };
    let (beta, code) = match a.algo {
        FitAlgo::Ista => iterative(solve_ista(&problem, None, &cfg)?)?,
        FitAlgo::Fista => iterative(solve_fista(&problem, None, &cfg)?)?,
        FitAlgo::Cgda => iterative(solve_cgda(&problem, None, &cfg)?)?,
        FitAlgo::Sla => {
            let params = SurrogateParams::new(a.alpha.expect("checked above"))?;
            iterative(solve_sla(&problem, params, None, &cfg)?)?
        }
        FitAlgo::Pfa => {
            let opts = PathOptions {
                mode: PathMode::Full,
                min_lambda: a.lambda.min(problem.lambda_max()),
            };
            let path = solve_path(&problem, &opts)?;
            (
                eval_path_at(&path, a.lambda.min(path.lambda_hi()))?,
                EXIT_OK,
            )
        }
        FitAlgo::Lars => {
            let path = solve_lars(&data.x, &data.y)?;
            (path.coefficients_at_lambda(a.lambda, problem.n()), EXIT_OK)
        }
    };
    if a.trace.is_some() && matches!(a.algo, FitAlgo::Pfa | FitAlgo::Lars) {
        eprintln!("note: --trace applies to iterative algorithms only; no trace written");
    }
    let stdout = io::stdout();
    csvio::write_coefficients(stdout.lock(), &beta)?;
    Ok(code)
}

fn segment_rows(path: &RegPath) -> (Vec<String>, Vec<Vec<String>>) {
    let width = path
        .segments
        .iter()
        .map(|s| s.support.len())
        .max()
        .unwrap_or(0);
    let mut header: Vec<String> = ["seg", "lambda_hi", "lambda_lo", "support"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for i in 1..=width {
        header.push(format!("intercept_{i}"));
        header.push(format!("slope_{i}"));
    }
    let rows = path
        .segments
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut row = vec![
                (i + 1).to_string(),
                fmt_real(s.lambda_hi),
                fmt_real(s.lambda_lo),
                join(&s.support.one_based()),
            ];
            for (a, b) in s.intercept.iter().zip(&s.slope) {
                row.push(fmt_real(*a));
                row.push(fmt_real(*b));
            }
            row.resize(header.len(), String::new());
            row
        })
        .collect();
    (header, rows)
}

fn join<T: ToString>(items: &[T]) -> String {
    items
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn join_reals(items: &[f64]) -> String {
    items
        .iter()
        .map(|v| fmt_real(*v))
        .collect::<Vec<_>>()
        .join(";")
}

fn failure_lines(f: &InsertionFailure) -> Vec<(String, String)> {
    let (reason, indices) = match &f.reason {
        FailureReason::SimultaneousEntry { indices } => ("simultaneous_entry", indices.clone()),
        FailureReason::DegenerateBoundary { indices } => ("degenerate_boundary", indices.clone()),
        FailureReason::SignCrossing { index, .. } => ("sign_crossing", vec![*index]),
    };
    let one_based: Vec<usize> = indices.iter().map(|j| j + 1).collect();
    let inactive: Vec<usize> = f.inactive.iter().map(|j| j + 1).collect();
    vec![
        ("status".into(), "failed_insertion".into()),
        ("loop".into(), f.loop_index.to_string()),
        ("lambda".into(), fmt_real(f.lambda)),
        ("support".into(), join(&f.support.one_based())),
        ("reason".into(), reason.into()),
        ("features".into(), join(&one_based)),
        ("inactive".into(), join(&inactive)),
        ("rhs".into(), join_reals(&f.rhs)),
        ("boundary_ratio".into(), join_reals(&f.boundary_ratio)),
        ("residual".into(), fmt_real(f.residual)),
    ]
}

fn cmd_path(a: &PathArgs) -> Result<i32> {
    let (_, problem) = load_problem(&a.data, 0.0)?;
    let opts = PathOptions {
        mode: match a.mode {
            CliPathMode::Full => PathMode::Full,
            CliPathMode::InsertionOnly => PathMode::InsertionOnly,
        },
        min_lambda: a.min_lambda,
    };
    let path = solve_path(&problem, &opts)?;
    let (header, rows) = segment_rows(&path);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    csvio::write_table(create(&a.out)?, &header, &rows)?;
    match &path.status {
        PathStatus::Completed => Ok(EXIT_OK),
        PathStatus::FailedInsertion(f) => {
            let mut err = io::stderr().lock();
            for (k, v) in failure_lines(f) {
                writeln!(err, "{k}: {v}")?;
            }
            Ok(EXIT_FAILED_INSERTION)
        }
    }
}

fn write_bench(path: &Path, result: &BenchResult, problem: &LassoProblem) -> Result<()> {
    let rows: Vec<Vec<String>> = result
        .trace_rows(problem)
        .into_iter()
        .map(|r| {
            vec![
                r.algo,
                r.k.to_string(),
                fmt_real(r.objective),
                fmt_real(r.gap),
                r.bound_rhs.map_or_else(String::new, fmt_real),
            ]
        })
        .collect();
    csvio::write_table(
        create(path)?,
        &["algo", "k", "objective", "gap", "bound_rhs"],
        &rows,
    )
}

fn print_bench_summary(result: &BenchResult) -> Result<()> {
    let rows: Vec<Vec<String>> = result
        .entries
        .iter()
        .map(|e| {
            let mut row = vec![e.label.clone()];
            row.extend(
                e.iterations_to_gap
                    .iter()
                    .map(|k| k.map_or_else(String::new, |k| k.to_string())),
            );
            row.push(e.wall_time.as_nanos().to_string());
            row.push(fmt_real(e.final_kkt));
            row.push(match e.bound.as_ref().map(|b| b.verdict) {
                None => String::new(),
                Some(Verdict::Holds) => "holds".into(),
                Some(Verdict::ViolatedAt(k)) => format!("violated-at-{k}"),
            });
            row
        })
        .collect();
    csvio::write_table(
        io::stdout().lock(),
        &[
            "algo",
            "iters_to_1e-2",
            "iters_to_1e-4",
            "iters_to_1e-6",
            "wall_ns",
            "final_kkt",
            "verdict",
        ],
        &rows,
    )
}

fn cmd_bench(a: &BenchArgs) -> Result<i32> {
    let (_, problem) = load_problem(&a.data, a.lambda)?;
    let params = SurrogateParams::new(a.alpha)?;
    let solvers: Vec<SolverSpec> = a
        .algos
        .iter()
        .map(|algo| match algo {
            BenchAlgo::Ista => a
                .oversized_step
                .map_or(SolverSpec::Ista, SolverSpec::IstaScaled),
            BenchAlgo::Fista => SolverSpec::Fista,
            BenchAlgo::Cgda => SolverSpec::Cgda,
            BenchAlgo::Sla => SolverSpec::Sla(params),
        })
        .collect();
    let cfg = BenchConfig {
        iters: a.iters,
        check_bounds: a.check_bounds,
        ..Default::default()
    };
    let result = bench_run(&problem, &solvers, &cfg)?;
    write_bench(&a.out, &result, &problem)?;
    print_bench_summary(&result)?;
    Ok(if result.any_violation() {
        EXIT_BOUND_VIOLATED
    } else {
        EXIT_OK
    })
}

/// `data.csv` -> `data.truth.csv`; other names get `.truth.csv` appended.
pub fn truth_path(out: &Path) -> PathBuf {
    let name = out
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let stem = name.strip_suffix(".csv").unwrap_or(&name);
    out.with_file_name(format!("{stem}.truth.csv"))
}

fn cmd_gen(a: &GenArgs) -> Result<i32> {
    let (x, y, beta_star, support) = match a.preset {
        Preset::Random => {
            let spec = GenSpec {
                standardize: a.standardize,
                ..GenSpec::new(a.n, a.p, a.sparsity, a.sigma, a.seed)
            };
            let d = gen_linear(&spec)?;
            let support: Vec<usize> = (0..a.p).filter(|&j| d.beta_star[j] != 0.0).collect();
            (d.x, d.y, d.beta_star, support)
        }
        Preset::Counterexample => {
            let betas = [a.betas[0], a.betas[1], a.betas[2]];
            let ce = build_counter_example(a.p, a.n, None, betas, a.seed)?;
            let beta_star = ce.beta_star();
            (ce.x, ce.y, beta_star, ce.true_support)
        }
    };
    csvio::write_dataset(create(&a.out)?, &x, &y)?;
    let rows: Vec<Vec<String>> = beta_star
        .iter()
        .enumerate()
        .map(|(j, b)| {
            vec![
                (j + 1).to_string(),
                fmt_real(*b),
                u8::from(support.contains(&j)).to_string(),
            ]
        })
        .collect();
    csvio::write_table(
        create(&truth_path(&a.out))?,
        &["feature", "beta", "in_support"],
        &rows,
    )?;
    Ok(EXIT_OK)
}

/// Grid and sharpness values of the surrogate plot.
pub const SURROGATE_ALPHAS: [f64; 3] = [1.0, 5.0, 20.0];

fn surrogate_rows() -> Result<Vec<Vec<String>>> {
    let params: Vec<SurrogateParams> = SURROGATE_ALPHAS
        .iter()
        .map(|&a| SurrogateParams::new(a))
        .collect::<Result<_>>()?;
    Ok((-300..=300)
        .map(|i| {
            let x = f64::from(i) / 100.0;
            let mut row = vec![fmt_real(x), fmt_real(x.abs())];
            row.extend(params.iter().map(|&p| fmt_real(surrogate_phi(x, p))));
            row
        })
        .collect())
}

/// Instance behind the convergence study: n = 100, p = 50, five nonzeros,
/// noise 0.5, lambda = 0.1 lambda_max.
pub fn standard_instance(seed: u64) -> Result<LassoProblem> {
    Ok(lasso_instance(&GenSpec::new(100, 50, 5, 0.5, seed), 0.1)?.1)
}

pub fn counterexample_rows(report: &CounterExampleReport) -> Vec<(String, String)> {
    let mut rows: Vec<(String, String)> = vec![
        ("seed".into(), report.seed.to_string()),
        ("n".into(), report.n.to_string()),
        ("p".into(), report.p.to_string()),
        ("lambda_max".into(), fmt_real(report.lambda_max)),
    ];
    for (k, s) in report.supports.iter().enumerate() {
        rows.push((format!("support_loop_{}", k + 1), join(s)));
    }
    match &report.status {
        PathStatus::Completed => rows.push(("status".into(), "completed".into())),
        PathStatus::FailedInsertion(f) => {
            rows.extend(failure_lines(f).into_iter().map(|(k, v)| match k.as_str() {
                "status" => (k, v),
                _ => (format!("failure_{k}"), v),
            }))
        }
    }
    rows.push((
        "rhs_support_1_2".into(),
        join_reals(&report.leading_pair_rhs),
    ));
    rows.push(("small_lambda".into(), fmt_real(report.small_lambda)));
    rows.push(("oracle_support".into(), join(&report.oracle_support)));
    rows.push(("full_path_support".into(), join(&report.full_path_support)));
    rows.push(("true_support".into(), join(&report.true_support)));
    rows
}

fn cmd_repro(a: &ReproArgs) -> Result<i32> {
    std::fs::create_dir_all(&a.out_dir)?;
    match a.paper_figure {
        Figure::Surrogate => {
            let out = a.out_dir.join("surrogate.csv");
            csvio::write_table(
                create(&out)?,
                &["x", "abs", "phi_1", "phi_5", "phi_20"],
                &surrogate_rows()?,
            )?;
            println!("{}", out.display());
            Ok(EXIT_OK)
        }
        Figure::Convergence => {
            let problem = standard_instance(a.seed.unwrap_or(7))?;
            let solvers = [
                SolverSpec::Ista,
                SolverSpec::Fista,
                SolverSpec::Cgda,
                SolverSpec::Sla(SurrogateParams::new(200.0)?),
            ];
            let cfg = BenchConfig {
                iters: 1000,
                check_bounds: true,
                ..Default::default()
            };
            let result = bench_run(&problem, &solvers, &cfg)?;
            let out = a.out_dir.join("convergence.csv");
            write_bench(&out, &result, &problem)?;
            println!("{}", out.display());
            Ok(if result.any_violation() {
                EXIT_BOUND_VIOLATED
            } else {
                EXIT_OK
            })
        }
        Figure::Counterexample => {
            let report = reproduce_counter_example(a.seed.unwrap_or(1), a.p)?;
            let rows: Vec<Vec<String>> = counterexample_rows(&report)
                .into_iter()
                .map(|(k, v)| vec![k, v])
                .collect();
            let out = a.out_dir.join("counterexample.csv");
            csvio::write_table(create(&out)?, &["field", "value"], &rows)?;
            println!("{}", out.display());
            Ok(EXIT_OK)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truth_sidecar_name() {
        assert_eq!(
            truth_path(Path::new("/tmp/d.csv")),
            PathBuf::from("/tmp/d.truth.csv")
        );
        assert_eq!(
            truth_path(Path::new("data")),
            PathBuf::from("data.truth.csv")
        );
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["lassolab", "fit", "--bogus"]), EXIT_INPUT);
        assert_eq!(run(["lassolab"]), EXIT_INPUT);
        assert_eq!(run(["lassolab", "--help"]), EXIT_OK);
    }

    #[test]
    fn surrogate_grid_contains_origin() {
        let rows = surrogate_rows().unwrap();
        assert_eq!(rows.len(), 601);
        let origin = &rows[300];
        assert_eq!(origin[0].parse::<f64>().unwrap(), 0.0);
        let phi: f64 = origin[2].parse().unwrap();
        assert!((phi - 2.0 * std::f64::consts::LN_2).abs() < 1e-15);
    }
}
