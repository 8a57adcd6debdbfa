//! SOR cell update, color sweeps, the red-black iteration driver and the
//! serial reference solvers.

use core::mem;
use core::ops::Range;

use crate::grid::{CellColor, Grid};
use crate::Error;

/// Relaxation parameters shared by all solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverConfig {
    /// Relaxation factor, `0 < omega < 2`.
    pub omega: f64,
    /// Convergence tolerance on the largest per-iteration change.
    pub epsilon: f64,
    pub max_iterations: usize,
    /// Iterations between convergence checks (checks run when `iter % K == 0`).
    pub check_interval: usize,
    /// Worker count for the parallel solver; ignored by the serial ones.
    pub workers: usize,
}

impl SolverConfig {
    pub const DEFAULT_OMEGA: f64 = 0.376;
    pub const DEFAULT_EPSILON: f64 = 1e-5;
    pub const DEFAULT_MAX_ITERATIONS: usize = 50_000;
    pub const DEFAULT_CHECK_INTERVAL: usize = 4_000;

    /// Runs exactly `iterations` iterations with one check at the end that can
    /// only succeed on an exact fixed point. Used for timing runs.
    pub fn fixed_iterations(omega: f64, iterations: usize, workers: usize) -> Self {
        SolverConfig {
            omega,
            epsilon: f64::MIN_POSITIVE,
            max_iterations: iterations,
            check_interval: iterations,
            workers,
        }
    }

    pub fn with_omega(self, omega: f64) -> Self {
        SolverConfig { omega, ..self }
    }

    pub fn with_workers(self, workers: usize) -> Self {
        SolverConfig { workers, ..self }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.omega > 0.0 && self.omega < 2.0) {
            return Err(Error::InvalidOmega(self.omega));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidEpsilon(self.epsilon));
        }
        if self.max_iterations == 0 {
            return Err(Error::ZeroMaxIterations);
        }
        if self.check_interval == 0 || self.check_interval > self.max_iterations {
            return Err(Error::InvalidCheckInterval {
                check_interval: self.check_interval,
                max_iterations: self.max_iterations,
            });
        }
        if self.workers == 0 {
            return Err(Error::ZeroWorkers);
        }
        Ok(())
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            omega: Self::DEFAULT_OMEGA,
            epsilon: Self::DEFAULT_EPSILON,
            max_iterations: Self::DEFAULT_MAX_ITERATIONS,
            check_interval: Self::DEFAULT_CHECK_INTERVAL,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum StopReason {
    Converged,
    IterationLimit,
    /// An [`Observer`] asked the solve to stop early.
    Interrupted,
}

/// Outcome of a solve, without timing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    pub converged: bool,
    pub iterations: usize,
    /// Largest per-iteration change at the last check; `None` if no check ran.
    pub final_max_change: Option<f64>,
    pub stop: StopReason,
}

/// Instrumentation hooks invoked by the solvers from the coordinating thread.
///
/// All methods default to no-ops. `iteration` is 1-based.
pub trait Observer {
    /// The grid was copied just before the sweeps of a check iteration.
    fn on_snapshot(&mut self, _iteration: usize, _grid: &Grid) {}

    /// A color phase finished and all its workers have synchronized.
    fn on_phase(&mut self, _iteration: usize, _color: CellColor, _grid: &Grid) {}

    /// A convergence check measured `max_change`.
    fn on_check(&mut self, _iteration: usize, _max_change: f64) {}

    /// Polled once at the end of every iteration that did not converge.
    fn should_stop(&mut self, _iteration: usize) -> bool {
        false
    }
}

impl Observer for () {}

impl<O: Observer + ?Sized> Observer for &mut O {
    fn on_snapshot(&mut self, iteration: usize, grid: &Grid) {
        (**self).on_snapshot(iteration, grid)
    }
    fn on_phase(&mut self, iteration: usize, color: CellColor, grid: &Grid) {
        (**self).on_phase(iteration, color, grid)
    }
    fn on_check(&mut self, iteration: usize, max_change: f64) {
        (**self).on_check(iteration, max_change)
    }
    fn should_stop(&mut self, iteration: usize) -> bool {
        (**self).should_stop(iteration)
    }
}

impl<A: Observer, B: Observer> Observer for (A, B) {
    fn on_snapshot(&mut self, iteration: usize, grid: &Grid) {
        self.0.on_snapshot(iteration, grid);
        self.1.on_snapshot(iteration, grid);
    }
    fn on_phase(&mut self, iteration: usize, color: CellColor, grid: &Grid) {
        self.0.on_phase(iteration, color, grid);
        self.1.on_phase(iteration, color, grid);
    }
    fn on_check(&mut self, iteration: usize, max_change: f64) {
        self.0.on_check(iteration, max_change);
        self.1.on_check(iteration, max_change);
    }
    fn should_stop(&mut self, iteration: usize) -> bool {
        // both are polled so stateful observers see every iteration
        let a = self.0.should_stop(iteration);
        let b = self.1.should_stop(iteration);
        a || b
    }
}

/// Runs one color phase over all interior rows and returns once every cell of
/// that color has been updated.
pub trait PhaseExecutor {
    type Error: From<Error>;

    fn run_phase(&mut self, grid: &mut Grid, color: CellColor, omega: f64)
        -> Result<(), Self::Error>;
}

/// Sweeps the whole interior on the calling thread.
#[derive(Debug, Default, Clone, Copy)]
pub struct SerialExecutor;

impl PhaseExecutor for SerialExecutor {
    type Error = Error;

    fn run_phase(&mut self, grid: &mut Grid, color: CellColor, omega: f64) -> Result<(), Error> {
        let rows = grid.interior_rows();
        sweep_color(grid, color, omega, rows);
        Ok(())
    }
}

pub(crate) mod kernel {
    use core::ops::Range;

    use crate::grid::CellColor;

    /// `omega * avg + (1 - omega) * old`, evaluated as `old + omega * (avg - old)`
    /// so that a cell already equal to its neighbor average is left bitwise
    /// unchanged for every `omega`.
    #[inline(always)]
    pub(crate) fn relax(up: f64, down: f64, left: f64, right: f64, old: f64, omega: f64) -> f64 {
        let gs = (up + down + left + right) / 4.0;
        old + omega * (gs - old)
    }

    /// Stride-2 color sweep: each row starts at the first column of `color`
    /// and steps by two, so no cell is tested for parity.
    ///
    /// # Safety
    /// `ptr` addresses `n * n` values, `rows` lies within `1..n - 1`, and no
    /// other thread accesses the cells read or written here except under the
    /// contract of [`crate::RawGrid::sweep_rows`].
    #[inline(always)]
    pub(crate) unsafe fn sweep<F: FnMut(usize, usize)>(
        ptr: *mut f64,
        n: usize,
        color: CellColor,
        omega: f64,
        rows: Range<usize>,
        mut on_write: F,
    ) {
        for i in rows {
            let first = 1 + ((i + 1 + color.parity()) & 1);
            let up = ptr.add((i - 1) * n);
            let row = ptr.add(i * n);
            let down = ptr.add((i + 1) * n);
            let mut j = first;
            while j < n - 1 {
                let cell = row.add(j);
                *cell = relax(
                    *up.add(j),
                    *down.add(j),
                    *row.add(j - 1),
                    *row.add(j + 1),
                    *cell,
                    omega,
                );
                on_write(i, j);
                j += 2;
            }
        }
    }
}

/// SOR value for interior cell `(i, j)` from the current grid state:
/// `omega * avg(neighbors) + (1 - omega) * X(i, j)`, where `avg` is the mean of
/// the north, south, west and east neighbors.
///
/// # Panics
/// If `(i, j)` is a boundary cell or outside the grid.
pub fn sor_cell_update(grid: &Grid, i: usize, j: usize, omega: f64) -> f64 {
    let n = grid.side();
    assert!(
        (1..n - 1).contains(&i) && (1..n - 1).contains(&j),
        "({i}, {j}) is not an interior cell of a {n}x{n} grid"
    );
    kernel::relax(
        grid[(i - 1, j)],
        grid[(i + 1, j)],
        grid[(i, j - 1)],
        grid[(i, j + 1)],
        grid[(i, j)],
        omega,
    )
}

/// Relaxes in place every `color` cell of the interior rows in `rows`.
///
/// # Panics
/// If `rows` reaches outside the interior rows.
pub fn sweep_color(grid: &mut Grid, color: CellColor, omega: f64, rows: Range<usize>) {
    let n = grid.side();
    assert!(
        rows.is_empty() || (rows.start >= 1 && rows.end < n),
        "rows {rows:?} outside interior of a {n}x{n} grid"
    );
    let raw = grid.as_raw();
    // SAFETY: exclusive borrow of `grid`, rows checked above.
    unsafe { raw.sweep_rows(color, omega, rows) }
}

/// Largest absolute cellwise difference between two grids of the same side.
pub fn max_abs_diff(a: &Grid, b: &Grid) -> Result<f64, Error> {
    if a.side() != b.side() {
        return Err(Error::DimensionMismatch {
            left: a.side(),
            right: b.side(),
        });
    }
    Ok(a
        .values()
        .iter()
        .zip(b.values())
        .fold(0.0, |acc: f64, (x, y)| acc.max((x - y).abs())))
}

/// Red-black iteration loop shared by every SOR solver.
///
/// Each iteration runs the red phase then the black phase through `exec`. On
/// iterations that are multiples of `check_interval` the grid is copied before
/// the red phase and compared after the black phase; the solve stops as soon
/// as that change drops below `epsilon`. The check runs here, on the calling
/// thread, never concurrently with a phase.
pub fn run_red_black<E, O>(
    grid: &mut Grid,
    config: &SolverConfig,
    exec: &mut E,
    mut observer: O,
) -> Result<Convergence, E::Error>
where
    E: PhaseExecutor,
    O: Observer,
{
    config.validate()?;
    let mut snapshot: Option<Grid> = None;
    let mut last_change = None;

    for iter in 1..=config.max_iterations {
        let check = iter % config.check_interval == 0;
        if check {
            match snapshot.as_mut() {
                Some(s) => s.copy_from(grid),
                None => snapshot = Some(grid.clone()),
            }
            observer.on_snapshot(iter, grid);
        }

        exec.run_phase(grid, CellColor::Red, config.omega)?;
        observer.on_phase(iter, CellColor::Red, grid);
        exec.run_phase(grid, CellColor::Black, config.omega)?;
        observer.on_phase(iter, CellColor::Black, grid);

        if check {
            let old = snapshot.as_ref().expect("snapshot taken above");
            let change = max_abs_diff(grid, old)?;
            observer.on_check(iter, change);
            last_change = Some(change);
            if change < config.epsilon {
                return Ok(Convergence {
                    converged: true,
                    iterations: iter,
                    final_max_change: last_change,
                    stop: StopReason::Converged,
                });
            }
        }

        if observer.should_stop(iter) {
            return Ok(Convergence {
                converged: false,
                iterations: iter,
                final_max_change: last_change,
                stop: StopReason::Interrupted,
            });
        }
    }

    Ok(Convergence {
        converged: false,
        iterations: config.max_iterations,
        final_max_change: last_change,
        stop: StopReason::IterationLimit,
    })
}

/// Serial red-black SOR. `config.workers` is ignored.
pub fn solve_serial<O: Observer>(
    grid: &mut Grid,
    config: &SolverConfig,
    observer: O,
) -> Result<Convergence, Error> {
    run_red_black(grid, config, &mut SerialExecutor, observer)
}

/// Red-black Gauss-Seidel: [`solve_serial`] with `omega = 1`.
pub fn gauss_seidel<O: Observer>(
    grid: &mut Grid,
    config: &SolverConfig,
    observer: O,
) -> Result<Convergence, Error> {
    solve_serial(grid, &config.with_omega(1.0), observer)
}

/// Jacobi iteration: every interior cell becomes the average of its four
/// neighbors from the previous iterate. `omega` and `workers` are ignored.
///
/// Uses the same check cadence as the SOR solvers. Only [`Observer::on_check`]
/// and [`Observer::should_stop`] are called.
pub fn jacobi<O: Observer>(
    grid: &mut Grid,
    config: &SolverConfig,
    mut observer: O,
) -> Result<Convergence, Error> {
    config.validate()?;
    let n = grid.side();
    let mut next = grid.clone();
    let mut last_change = None;
    let mut outcome = None;

    for iter in 1..=config.max_iterations {
        {
            let cur = grid.values();
            let out = next.values_mut();
            for i in 1..n - 1 {
                for j in 1..n - 1 {
                    let k = i * n + j;
                    out[k] = (cur[k - n] + cur[k + n] + cur[k - 1] + cur[k + 1]) / 4.0;
                }
            }
        }
        // `grid` becomes the new iterate, `next` holds the previous one
        mem::swap(grid, &mut next);

        if iter % config.check_interval == 0 {
            let change = max_abs_diff(grid, &next)?;
            observer.on_check(iter, change);
            last_change = Some(change);
            if change < config.epsilon {
                outcome = Some((iter, StopReason::Converged));
                break;
            }
        }
        if observer.should_stop(iter) {
            outcome = Some((iter, StopReason::Interrupted));
            break;
        }
    }

    let (iterations, stop) = outcome.unwrap_or((config.max_iterations, StopReason::IterationLimit));
    Ok(Convergence {
        converged: stop == StopReason::Converged,
        iterations,
        final_max_change: last_change,
        stop,
    })
}
