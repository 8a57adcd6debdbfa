//! Command-line front end for single solves and the scaling benchmark.

use std::fs;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Parser, ValueEnum};
use sor_core::{BoundarySpec, Grid, SolverConfig};

use crate::bench::{self, ReportFormat};
use crate::io::{self, GridFormat};
use crate::report::{solve_serial_with, Deadline, SolveReport};
use crate::scheduler::{solve_parallel_with, ParallelOptions};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

/// Problem size used by `--mode bench` unless overridden.
pub const BENCH_GRID_SIDE: usize = 258;
pub const BENCH_CHECK_INTERVAL: usize = 100;
pub const BENCH_MAX_ITERATIONS: usize = 20_000;
pub const SOLVE_GRID_SIDE: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Solve,
    Bench,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Pgm,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "sor",
    version,
    about = "Red-black SOR solver for the 2D steady-state heat problem"
)]
struct Args {
    /// Run one solve or the worker-count scaling benchmark.
    #[arg(long, value_enum, default_value_t = Mode::Solve)]
    mode: Mode,
    /// Grid side including the boundary ring [default: 4096, bench: 258].
    #[arg(long)]
    n: Option<usize>,
    /// Relaxation factor, 0 < omega < 2.
    #[arg(long, default_value_t = SolverConfig::DEFAULT_OMEGA, allow_negative_numbers = true)]
    omega: f64,
    /// Tolerance on the largest per-iteration change.
    #[arg(long, default_value_t = SolverConfig::DEFAULT_EPSILON, allow_negative_numbers = true)]
    epsilon: f64,
    /// Iteration cap [default: 50000, bench: 20000].
    #[arg(long = "max-iters")]
    max_iters: Option<usize>,
    /// Iterations between convergence checks (K) [default: 4000, bench: 100].
    #[arg(long = "check-interval")]
    check_interval: Option<usize>,
    /// Worker threads for a single solve.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Worker counts to benchmark, comma separated; must include 1.
    #[arg(long = "worker-counts", value_delimiter = ',', default_values_t = [1usize, 2, 4, 8])]
    worker_counts: Vec<usize>,
    /// Timed repetitions per worker count; the minimum is reported.
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    north: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    south: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    east: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    west: f64,
    /// Initial interior temperature.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    init: f64,
    /// Output file: the final grid (csv, pgm) or the report (json; csv in bench mode).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Stop a solve after this many seconds (checked once per iteration).
    #[arg(long = "time-limit", allow_negative_numbers = true)]
    time_limit: Option<f64>,
}

/// Validated command line.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub mode: Mode,
    pub grid_side: usize,
    pub boundary: BoundarySpec,
    pub interior_init: f64,
    pub solver: SolverConfig,
    pub worker_counts: Vec<usize>,
    pub repetitions: usize,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
    pub time_limit: Option<Duration>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// `--help` or `--version`; the text goes to stdout with exit code 0.
    Info(String),
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Info(_) => EXIT_OK,
            CliError::Usage(_) => EXIT_USAGE,
        }
    }
}

/// Parses and validates arguments (without the program name).
pub fn parse_cli<I, S>(args: I) -> Result<CliConfig, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once(std::ffi::OsString::from("sor"))
        .chain(args.into_iter().map(Into::into));
    let args = Args::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            CliError::Info(e.to_string())
        }
        _ => CliError::Usage(e.to_string()),
    })?;
    let usage = |m: String| CliError::Usage(format!("error: {m}"));

    let bench_mode = args.mode == Mode::Bench;
    let grid_side = args
        .n
        .unwrap_or(if bench_mode { BENCH_GRID_SIDE } else { SOLVE_GRID_SIDE });
    let solver = SolverConfig {
        omega: args.omega,
        epsilon: args.epsilon,
        max_iterations: args.max_iters.unwrap_or(if bench_mode {
            BENCH_MAX_ITERATIONS
        } else {
            SolverConfig::DEFAULT_MAX_ITERATIONS
        }),
        check_interval: args.check_interval.unwrap_or(if bench_mode {
            BENCH_CHECK_INTERVAL
        } else {
            SolverConfig::DEFAULT_CHECK_INTERVAL
        }),
        workers: args.workers,
    };
    solver.validate().map_err(|e| {
        use sor_core::Error as E;
        let flag = match e {
            E::InvalidOmega(_) => "--omega",
            E::InvalidEpsilon(_) => "--epsilon",
            E::ZeroMaxIterations => "--max-iters",
            E::InvalidCheckInterval { .. } => "--check-interval",
            E::ZeroWorkers => "--workers",
            _ => "arguments",
        };
        usage(format!("{flag}: {e}"))
    })?;

    let boundary = BoundarySpec {
        north: args.north,
        south: args.south,
        east: args.east,
        west: args.west,
    };
    Grid::new(3, boundary, args.init)
        .map_err(|e| usage(format!("--north/--south/--east/--west/--init: {e}")))?;
    if grid_side < 3 {
        return Err(usage(format!("--n: grid side must be at least 3 (got {grid_side})")));
    }

    if bench_mode {
        bench::validate_worker_counts(&args.worker_counts)
            .map_err(|e| usage(format!("--worker-counts: {e}")))?;
        if args.reps == 0 {
            return Err(usage("--reps: must be at least 1".into()));
        }
        if args.format == OutputFormat::Pgm {
            return Err(usage("--format pgm is only available in solve mode".into()));
        }
    }
    let time_limit = args
        .time_limit
        .map(|s| {
            Duration::try_from_secs_f64(s)
                .ok()
                .filter(|d| !d.is_zero())
                .ok_or_else(|| usage(format!("--time-limit: expected positive seconds (got {s})")))
        })
        .transpose()?;

    Ok(CliConfig {
        mode: args.mode,
        grid_side,
        boundary,
        interior_init: args.init,
        solver,
        worker_counts: args.worker_counts,
        repetitions: args.reps,
        output_path: args.out,
        output_format: args.format,
        time_limit,
    })
}

/// Executes a parsed command line and returns the process exit code.
pub fn run(config: &CliConfig) -> Result<i32, Error> {
    match config.mode {
        Mode::Solve => run_solve(config),
        Mode::Bench => run_bench(config),
    }
}

fn run_solve(config: &CliConfig) -> Result<i32, Error> {
    let mut grid = Grid::new(config.grid_side, config.boundary, config.interior_init)?;
    let deadline = config.time_limit.map(Deadline::after);
    let report: SolveReport = if config.solver.workers == 1 {
        match deadline {
            Some(d) => solve_serial_with(&mut grid, &config.solver, d)?,
            None => solve_serial_with(&mut grid, &config.solver, ())?,
        }
    } else {
        let opts = ParallelOptions::default();
        match deadline {
            Some(d) => solve_parallel_with(&mut grid, &config.solver, d, &opts)?.0,
            None => solve_parallel_with(&mut grid, &config.solver, (), &opts)?.0,
        }
    };
    println!("{report}");

    if let Some(path) = &config.output_path {
        match config.output_format {
            OutputFormat::Csv => io::write_grid(&grid, GridFormat::Csv, path)?,
            OutputFormat::Pgm => io::write_grid(&grid, GridFormat::Pgm, path)?,
            OutputFormat::Json => {
                let text = serde_json::to_string_pretty(&serde_json::json!({
                    "grid_side": config.grid_side,
                    "config": config.solver,
                    "report": report,
                }))
                .expect("report serializes");
                fs::write(path, text + "\n").map_err(|e| Error::io(path, e))?;
            }
        }
    }
    Ok(if report.converged {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    })
}

fn run_bench(config: &CliConfig) -> Result<i32, Error> {
    let result = bench::run_benchmark_with(
        config.grid_side,
        config.boundary,
        &config.solver,
        &config.worker_counts,
        config.repetitions,
        |e| {
            eprintln!(
                "workers={} seconds={:.3} iterations={} converged={}",
                e.workers, e.seconds, e.iterations, e.converged
            )
        },
    )?;
    print!("{}", bench::emit_report(&result, ReportFormat::Table));
    if let Some(path) = &config.output_path {
        let format = match config.output_format {
            OutputFormat::Json => ReportFormat::Json,
            _ => ReportFormat::Csv,
        };
        fs::write(path, bench::emit_report(&result, format)).map_err(|e| Error::io(path, e))?;
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<CliConfig, CliError> {
        parse_cli(s.split_whitespace())
    }

    #[test]
    fn defaults_are_paper_constants() {
        let c = parse("").unwrap();
        assert_eq!(c.mode, Mode::Solve);
        assert_eq!(c.grid_side, 4096);
        assert_eq!(c.solver, SolverConfig::default());
        assert_eq!(c.solver.omega, 0.376);
        assert_eq!(c.solver.epsilon, 1e-5);
        assert_eq!(c.solver.check_interval, 4000);
        assert_eq!(c.solver.max_iterations, 50_000);
        assert_eq!(c.boundary, BoundarySpec::north_hot());
        assert_eq!(c.interior_init, 0.0);
        assert_eq!(c.output_path, None);
    }

    #[test]
    fn overrides() {
        let c = parse("--omega 1.0 --n 65").unwrap();
        assert_eq!(c.solver.omega, 1.0);
        assert_eq!(c.grid_side, 65);
        let c = parse("--mode bench --worker-counts 1,2,4 --reps 2 --format json --out r.json")
            .unwrap();
        assert_eq!(c.mode, Mode::Bench);
        assert_eq!(c.grid_side, BENCH_GRID_SIDE);
        assert_eq!(c.solver.check_interval, BENCH_CHECK_INTERVAL);
        assert_eq!(c.worker_counts, vec![1, 2, 4]);
        assert_eq!(c.repetitions, 2);
        assert_eq!(c.output_format, OutputFormat::Json);
        let c = parse("--west -0.5 --time-limit 2.5").unwrap();
        assert_eq!(c.boundary.west, -0.5);
        assert_eq!(c.time_limit, Some(Duration::from_millis(2500)));
    }

    #[test]
    fn rejections() {
        let cases = [
            ("--omega 2.5", "--omega"),
            ("--omega 0", "--omega"),
            ("--epsilon 0", "--epsilon"),
            ("--check-interval 10 --max-iters 5", "--check-interval"),
            ("--workers 0", "--workers"),
            ("--n 2", "--n"),
            ("--north nan", "--north"),
            ("--mode bench --worker-counts 2,4", "--worker-counts"),
            ("--mode bench --reps 0", "--reps"),
            ("--mode bench --format pgm", "pgm"),
            ("--time-limit -1", "--time-limit"),
            ("--omega abc", "abc"),
            ("--bogus 1", "--bogus"),
        ];
        for (args, needle) in cases {
            match parse(args) {
                Err(CliError::Usage(msg)) => assert!(msg.contains(needle), "{args}: {msg}"),
                other => panic!("{args}: expected usage error, got {other:?}"),
            }
        }
    }

    #[test]
    fn help_is_not_an_error() {
        let e = parse("--help").unwrap_err();
        assert_eq!(e.exit_code(), EXIT_OK);
        assert!(matches!(e, CliError::Info(ref t) if t.contains("--check-interval")));
    }
}
