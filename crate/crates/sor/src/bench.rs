//! Scaling benchmark: time the same problem at several worker counts and
//! report speedups against the single-worker run.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sor_core::{BoundarySpec, Grid, SolverConfig};

use crate::report::SolveReport;
use crate::{solve_parallel, solve_serial, Error, Result};

/// `t1 / tp`.
pub fn speedup(t1: f64, tp: f64) -> Result<f64> {
    if !(t1 > 0.0 && tp > 0.0 && t1.is_finite() && tp.is_finite()) {
        return Err(Error::Bench(format!(
            "speedup needs positive finite times (got {t1} and {tp})"
        )));
    }
    Ok(t1 / tp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchEntry {
    pub workers: usize,
    /// Aggregated wall time over the repetitions (the minimum).
    pub seconds: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Timings for one problem across worker counts.
///
/// Speedups are not stored; they are always recomputed from `seconds`
/// against the `workers == 1` entry.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct BenchmarkResult {
    pub grid_side: usize,
    pub boundary: BoundarySpec,
    /// Solver settings shared by every entry; `workers` is always 1 here.
    pub config: SolverConfig,
    pub repetitions: usize,
    pub entries: Vec<BenchEntry>,
}

impl BenchmarkResult {
    pub fn baseline(&self) -> Option<&BenchEntry> {
        self.entries.iter().find(|e| e.workers == 1)
    }

    /// Speedup of `entry` over the baseline; exactly 1 for the baseline itself.
    pub fn speedup_of(&self, entry: &BenchEntry) -> Option<f64> {
        let base = self.baseline()?;
        if entry.workers == 1 {
            return Some(1.0);
        }
        speedup(base.seconds, entry.seconds).ok()
    }

    pub fn all_converged(&self) -> bool {
        self.entries.iter().all(|e| e.converged)
    }
}

/// Worker counts must be non-empty, distinct, positive and include 1.
pub fn validate_worker_counts(worker_counts: &[usize]) -> Result<()> {
    if worker_counts.is_empty() {
        return Err(Error::Bench("no worker counts given".into()));
    }
    if worker_counts.contains(&0) {
        return Err(Error::Bench("worker counts must be at least 1".into()));
    }
    if !worker_counts.contains(&1) {
        return Err(Error::Bench(
            "worker counts must include 1 for the serial baseline".into(),
        ));
    }
    if let Some(dup) = worker_counts
        .iter()
        .enumerate()
        .find_map(|(k, w)| worker_counts[..k].contains(w).then_some(w))
    {
        return Err(Error::Bench(format!("worker count {dup} listed twice")));
    }
    Ok(())
}

/// Runs `config` on a fresh `grid_side` grid for every worker count, keeping
/// the fastest of `repetitions` runs. One worker runs the serial solver; more
/// run the thread pool. Grid construction is not timed.
pub fn run_benchmark(
    grid_side: usize,
    boundary: BoundarySpec,
    config: &SolverConfig,
    worker_counts: &[usize],
    repetitions: usize,
) -> Result<BenchmarkResult> {
    run_benchmark_with(grid_side, boundary, config, worker_counts, repetitions, |_| {})
}

/// [`run_benchmark`], calling `on_entry` as each worker count finishes.
pub fn run_benchmark_with<F: FnMut(&BenchEntry)>(
    grid_side: usize,
    boundary: BoundarySpec,
    config: &SolverConfig,
    worker_counts: &[usize],
    repetitions: usize,
    mut on_entry: F,
) -> Result<BenchmarkResult> {
    validate_worker_counts(worker_counts)?;
    if repetitions == 0 {
        return Err(Error::Bench("repetitions must be at least 1".into()));
    }
    let config = config.with_workers(1);
    config.validate()?;
    // fail on a bad problem before any timing
    Grid::new(grid_side, boundary, 0.0)?;

    let mut entries = Vec::with_capacity(worker_counts.len());
    for &workers in worker_counts {
        let run_config = config.with_workers(workers);
        let mut best: Option<SolveReport> = None;
        for _ in 0..repetitions {
            let mut grid = Grid::new(grid_side, boundary, 0.0)?;
            let report = if workers == 1 {
                solve_serial(&mut grid, &run_config)?
            } else {
                solve_parallel(&mut grid, &run_config)?
            };
            if best.is_none_or(|b| report.elapsed_seconds < b.elapsed_seconds) {
                best = Some(report);
            }
        }
        let best = best.expect("repetitions >= 1");
        let entry = BenchEntry {
            workers,
            seconds: best.elapsed_seconds,
            converged: best.converged,
            iterations: best.iterations,
        };
        on_entry(&entry);
        entries.push(entry);
    }

    Ok(BenchmarkResult {
        grid_side,
        boundary,
        config,
        repetitions,
        entries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// Threads / seconds / speedup table, `-` for the baseline speedup.
    Table,
    Csv,
    Json,
}

pub const CSV_HEADER: &str = "workers,seconds,speedup,converged,iterations";

pub fn emit_report(result: &BenchmarkResult, format: ReportFormat) -> String {
    match format {
        ReportFormat::Table => emit_table(result),
        ReportFormat::Csv => emit_csv(result),
        ReportFormat::Json => emit_json(result),
    }
}

fn emit_table(result: &BenchmarkResult) -> String {
    let c = &result.config;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "grid {n}x{n}, omega={}, epsilon={:e}, K={}, max iterations={}, min of {} run(s)",
        c.omega,
        c.epsilon,
        c.check_interval,
        c.max_iterations,
        result.repetitions,
        n = result.grid_side,
    );
    let _ = writeln!(
        out,
        "{:<12} {:>12} {:>8} {:>10} {:>10}",
        "Threads", "Seconds", "Speedup", "Iterations", "Converged"
    );
    for e in &result.entries {
        let threads = if e.workers == 1 {
            "1 (Serial)".to_string()
        } else {
            e.workers.to_string()
        };
        let speedup = match (e.workers, result.speedup_of(e)) {
            (1, _) | (_, None) => "-".to_string(),
            (_, Some(s)) => format!("{s:.2}"),
        };
        let converged = if e.converged { "yes" } else { "NO" };
        let _ = writeln!(
            out,
            "{threads:<12} {:>12.3} {speedup:>8} {:>10} {converged:>10}",
            e.seconds, e.iterations
        );
    }
    if !result.all_converged() {
        out.push_str("warning: some runs stopped before reaching epsilon\n");
    }
    out
}

fn emit_csv(result: &BenchmarkResult) -> String {
    let c = &result.config;
    let b = &result.boundary;
    let mut out = String::new();
    let meta = [
        ("grid_side", result.grid_side.to_string()),
        ("omega", c.omega.to_string()),
        ("epsilon", c.epsilon.to_string()),
        ("max_iterations", c.max_iterations.to_string()),
        ("check_interval", c.check_interval.to_string()),
        ("repetitions", result.repetitions.to_string()),
        ("north", b.north.to_string()),
        ("south", b.south.to_string()),
        ("east", b.east.to_string()),
        ("west", b.west.to_string()),
    ];
    for (k, v) in meta {
        let _ = writeln!(out, "# {k}={v}");
    }
    out.push_str(CSV_HEADER);
    out.push('\n');
    for e in &result.entries {
        let speedup = result
            .speedup_of(e)
            .map(|s| s.to_string())
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            e.workers, e.seconds, speedup, e.converged, e.iterations
        );
    }
    out
}

#[derive(Serialize)]
struct JsonEntry {
    workers: usize,
    seconds: f64,
    speedup: Option<f64>,
    converged: bool,
    iterations: usize,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    grid_side: usize,
    boundary: &'a BoundarySpec,
    config: &'a SolverConfig,
    repetitions: usize,
    entries: Vec<JsonEntry>,
}

fn emit_json(result: &BenchmarkResult) -> String {
    let report = JsonReport {
        grid_side: result.grid_side,
        boundary: &result.boundary,
        config: &result.config,
        repetitions: result.repetitions,
        entries: result
            .entries
            .iter()
            .map(|e| JsonEntry {
                workers: e.workers,
                seconds: e.seconds,
                speedup: result.speedup_of(e),
                converged: e.converged,
                iterations: e.iterations,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&report).expect("report serializes")
}

/// Parses the output of `emit_report(_, ReportFormat::Json)`. The speedup
/// fields are ignored.
pub fn parse_json_report(text: &str) -> Result<BenchmarkResult> {
    serde_json::from_str(text).map_err(|e| Error::Report(e.to_string()))
}

/// Parses the output of `emit_report(_, ReportFormat::Csv)`. The speedup
/// column is ignored.
pub fn parse_csv_report(text: &str) -> Result<BenchmarkResult> {
    let bad = |m: String| Error::Report(m);
    let mut meta = BTreeMap::new();
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = loop {
        match lines.next() {
            Some(l) if l.starts_with('#') => {
                let (k, v) = l[1..]
                    .trim()
                    .split_once('=')
                    .ok_or_else(|| bad(format!("malformed metadata line {l:?}")))?;
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
            Some(l) => break l,
            None => return Err(bad("missing header".into())),
        }
    };
    if header.trim() != CSV_HEADER {
        return Err(bad(format!("unexpected header {header:?}")));
    }

    fn field<T: std::str::FromStr>(
        meta: &BTreeMap<String, String>,
        key: &str,
    ) -> std::result::Result<T, Error> {
        meta.get(key)
            .ok_or_else(|| Error::Report(format!("missing metadata {key}")))?
            .parse()
            .map_err(|_| Error::Report(format!("bad value for {key}")))
    }

    let entries = lines
        .map(|l| {
            let cols: Vec<&str> = l.split(',').map(str::trim).collect();
            if cols.len() != 5 {
                return Err(bad(format!("expected 5 columns in {l:?}")));
            }
            let parse_err = |what: &str| bad(format!("bad {what} in {l:?}"));
            Ok(BenchEntry {
                workers: cols[0].parse().map_err(|_| parse_err("workers"))?,
                seconds: cols[1].parse().map_err(|_| parse_err("seconds"))?,
                converged: cols[3].parse().map_err(|_| parse_err("converged"))?,
                iterations: cols[4].parse().map_err(|_| parse_err("iterations"))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(BenchmarkResult {
        grid_side: field(&meta, "grid_side")?,
        boundary: BoundarySpec {
            north: field(&meta, "north")?,
            south: field(&meta, "south")?,
            east: field(&meta, "east")?,
            west: field(&meta, "west")?,
        },
        config: SolverConfig {
            omega: field(&meta, "omega")?,
            epsilon: field(&meta, "epsilon")?,
            max_iterations: field(&meta, "max_iterations")?,
            check_interval: field(&meta, "check_interval")?,
            workers: 1,
        },
        repetitions: field(&meta, "repetitions")?,
        entries,
    })
}
