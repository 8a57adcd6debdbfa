//! Fork-join execution of the red and black phases on a pool of threads.
//!
//! The calling thread coordinates: it runs the iteration loop from
//! [`sor_core::solver::run_red_black`], takes snapshots and performs every
//! convergence check. For each phase it publishes a job, releases the workers
//! through a start barrier, sweeps its own row block as worker 0 and waits at
//! the done barrier for everyone else. Nothing touches the grid between a done
//! barrier and the next start barrier except the coordinator.

use std::ops::Range;
use std::panic::{self, AssertUnwindSafe};
use std::sync::{Barrier, Mutex};
use std::thread;
use std::time::Instant;

use sor_core::solver::{self, PhaseExecutor};
use sor_core::{partition_rows, CellColor, Grid, Observer, Partition, RawGrid, SolverConfig};

use crate::report::SolveReport;
use crate::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct ParallelOptions {
    /// Record every cell written by every worker. Slow; meant for small grids.
    pub track_writes: bool,
    /// Makes the given worker panic in its first phase.
    #[doc(hidden)]
    pub fail_worker: Option<usize>,
}

/// A cell written by a worker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WriteRecord {
    /// 1-based iteration number.
    pub iteration: usize,
    pub color: CellColor,
    pub row: usize,
    pub col: usize,
}

/// Execution details of a parallel solve.
#[derive(Debug, Clone)]
pub struct ParallelTrace {
    pub partition: Partition,
    /// Done-barrier crossings, one per completed phase.
    pub phase_barriers: usize,
    /// Per-worker write logs, indexed by worker id; empty unless
    /// [`ParallelOptions::track_writes`] was set.
    pub writes: Vec<Vec<WriteRecord>>,
}

/// Parallel red-black SOR with `config.workers` workers.
///
/// The result is bitwise identical to [`crate::solve_serial`] for any worker
/// count: within a phase each updated cell reads only cells of the other
/// color, which no worker writes during that phase.
pub fn solve_parallel(grid: &mut Grid, config: &SolverConfig) -> Result<SolveReport> {
    solve_parallel_with(grid, config, (), &ParallelOptions::default()).map(|(r, _)| r)
}

/// [`solve_parallel`] with an observer (called on the coordinating thread)
/// and instrumentation options.
///
/// If a worker fails, the solve returns [`Error::WorkerFailed`] and the grid
/// contents are unspecified.
pub fn solve_parallel_with<O: Observer>(
    grid: &mut Grid,
    config: &SolverConfig,
    observer: O,
    options: &ParallelOptions,
) -> Result<(SolveReport, ParallelTrace)> {
    config.validate()?;
    let partition = partition_rows(grid.side(), config.workers)?;
    let shared = Shared {
        start: Barrier::new(config.workers),
        done: Barrier::new(config.workers),
        job: Mutex::new(Job::Idle),
        failed: Mutex::new(None),
    };

    let started = Instant::now();
    let (outcome, elapsed, phase_barriers, writes) = thread::scope(|s| {
        let helpers: Vec<_> = partition.blocks()[1..]
            .iter()
            .map(|block| {
                let worker = Worker {
                    id: block.worker,
                    rows: block.rows.clone(),
                    track: options.track_writes,
                    fail: options.fail_worker == Some(block.worker),
                    log: Vec::new(),
                };
                let shared = &shared;
                thread::Builder::new()
                    .name(format!("sor-worker-{}", block.worker))
                    .spawn_scoped(s, move || worker.run(shared))
                    .expect("failed to spawn worker thread")
            })
            .collect();

        let mut pool = Pool {
            shared: &shared,
            own: Worker {
                id: 0,
                rows: partition.block(0).rows.clone(),
                track: options.track_writes,
                fail: options.fail_worker == Some(0),
                log: Vec::new(),
            },
            phases: 0,
            phase_barriers: 0,
            closed: false,
        };
        let outcome = solver::run_red_black(grid, config, &mut pool, observer);
        let elapsed = started.elapsed();
        pool.close();

        let mut writes = vec![std::mem::take(&mut pool.own.log)];
        writes.extend(
            helpers
                .into_iter()
                .map(|h| h.join().expect("worker thread panicked outside a phase")),
        );
        (outcome, elapsed, pool.phase_barriers, writes)
    });

    let report = SolveReport::new(outcome?, elapsed);
    Ok((
        report,
        ParallelTrace {
            partition,
            phase_barriers,
            writes,
        },
    ))
}

#[derive(Debug, Clone, Copy)]
enum Job {
    Idle,
    Sweep {
        grid: RawGrid,
        color: CellColor,
        omega: f64,
        iteration: usize,
    },
    Exit,
}

struct Shared {
    start: Barrier,
    done: Barrier,
    job: Mutex<Job>,
    /// Lowest id of a worker that panicked in the current phase.
    failed: Mutex<Option<usize>>,
}

struct Worker {
    id: usize,
    rows: Range<usize>,
    track: bool,
    fail: bool,
    log: Vec<WriteRecord>,
}

impl Worker {
    fn sweep(&mut self, shared: &Shared, job: Job) {
        let Job::Sweep {
            grid,
            color,
            omega,
            iteration,
        } = job
        else {
            return;
        };
        let rows = self.rows.clone();
        let fail = std::mem::take(&mut self.fail);
        let log = &mut self.log;
        let track = self.track;
        let result = panic::catch_unwind(AssertUnwindSafe(|| {
            if fail {
                panic!("injected worker failure");
            }
            // SAFETY: between the start and done barriers every worker sweeps
            // the same color on its own disjoint row block, and the
            // coordinator does not touch the grid.
            unsafe {
                if track {
                    grid.sweep_rows_logged(color, omega, rows, |row, col| {
                        log.push(WriteRecord {
                            iteration,
                            color,
                            row,
                            col,
                        })
                    });
                } else {
                    grid.sweep_rows(color, omega, rows);
                }
            }
        }));
        if result.is_err() {
            let mut failed = shared.failed.lock().unwrap();
            *failed = Some(failed.map_or(self.id, |w| w.min(self.id)));
        }
    }

    fn run(mut self, shared: &Shared) -> Vec<WriteRecord> {
        loop {
            shared.start.wait();
            let job = *shared.job.lock().unwrap();
            if let Job::Exit = job {
                break;
            }
            self.sweep(shared, job);
            shared.done.wait();
        }
        self.log
    }
}

struct Pool<'a> {
    shared: &'a Shared,
    own: Worker,
    phases: usize,
    phase_barriers: usize,
    closed: bool,
}

impl Pool<'_> {
    fn close(&mut self) {
        if !self.closed {
            self.closed = true;
            *self.shared.job.lock().unwrap() = Job::Exit;
            self.shared.start.wait();
        }
    }
}

impl Drop for Pool<'_> {
    fn drop(&mut self) {
        self.close();
    }
}

impl PhaseExecutor for Pool<'_> {
    type Error = Error;

    fn run_phase(&mut self, grid: &mut Grid, color: CellColor, omega: f64) -> Result<()> {
        self.phases += 1;
        let iteration = self.phases.div_ceil(2);
        let job = Job::Sweep {
            grid: grid.as_raw(),
            color,
            omega,
            iteration,
        };
        *self.shared.job.lock().unwrap() = job;
        self.shared.start.wait();
        self.own.sweep(self.shared, job);
        self.shared.done.wait();
        self.phase_barriers += 1;

        match self.shared.failed.lock().unwrap().take() {
            Some(worker) => Err(Error::WorkerFailed {
                worker,
                iteration,
                phase: color,
            }),
            None => Ok(()),
        }
    }
}
