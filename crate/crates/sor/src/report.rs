//! Timed solve entry points for the serial solvers.

use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sor_core::solver::{self, Convergence};
use sor_core::{Grid, Observer, SolverConfig, StopReason};

use crate::Result;

/// Outcome of one solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    /// Largest per-iteration change at the last convergence check, absent
    /// when the solve ended before the first check.
    pub final_max_change: Option<f64>,
    pub stop: StopReason,
    /// Wall-clock time spent in the iteration loop.
    pub elapsed_seconds: f64,
}

impl SolveReport {
    pub(crate) fn new(c: Convergence, elapsed: Duration) -> Self {
        SolveReport {
            converged: c.converged,
            iterations: c.iterations,
            final_max_change: c.final_max_change,
            stop: c.stop,
            elapsed_seconds: elapsed.as_secs_f64(),
        }
    }
}

impl fmt::Display for SolveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "converged={} iterations={} ", self.converged, self.iterations)?;
        match self.final_max_change {
            Some(c) => write!(f, "final_max_change={c:e} ")?,
            None => write!(f, "final_max_change=none ")?,
        }
        let stop = match self.stop {
            StopReason::Converged => "converged",
            StopReason::IterationLimit => "iteration-limit",
            StopReason::Interrupted => "time-limit",
        };
        write!(f, "stop={stop} elapsed={:.3}s", self.elapsed_seconds)
    }
}

/// Stops a solve once a wall-clock budget is used up. The check happens at
/// the end of each iteration, so the last iteration always completes.
#[derive(Debug, Clone, Copy)]
pub struct Deadline(Instant);

impl Deadline {
    pub fn after(budget: Duration) -> Self {
        Deadline(Instant::now() + budget)
    }
}

impl Observer for Deadline {
    fn should_stop(&mut self, _iteration: usize) -> bool {
        Instant::now() >= self.0
    }
}

fn timed<F>(f: F) -> Result<SolveReport>
where
    F: FnOnce() -> std::result::Result<Convergence, sor_core::Error>,
{
    let start = Instant::now();
    let c = f()?;
    Ok(SolveReport::new(c, start.elapsed()))
}

/// Serial red-black SOR on the calling thread.
pub fn solve_serial(grid: &mut Grid, config: &SolverConfig) -> Result<SolveReport> {
    solve_serial_with(grid, config, ())
}

pub fn solve_serial_with<O: Observer>(
    grid: &mut Grid,
    config: &SolverConfig,
    observer: O,
) -> Result<SolveReport> {
    timed(|| solver::solve_serial(grid, config, observer))
}

/// Red-black SOR with `omega` forced to 1.
pub fn gauss_seidel_solve(grid: &mut Grid, config: &SolverConfig) -> Result<SolveReport> {
    timed(|| solver::gauss_seidel(grid, config, ()))
}

pub fn jacobi_solve(grid: &mut Grid, config: &SolverConfig) -> Result<SolveReport> {
    timed(|| solver::jacobi(grid, config, ()))
}
