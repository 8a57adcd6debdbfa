//! Parallel red-black SOR solver for the 2D steady-state heat problem.
//!
//! Builds on [`sor_core`] with the pieces that need `std`: a fork-join thread
//! pool running one color phase at a time, wall-clock timed solve entry points,
//! the scaling benchmark harness, grid CSV/PGM files and the `sor` CLI.

pub mod bench;
pub mod cli;
mod error;
pub mod io;
pub mod report;
pub mod scheduler;

pub use sor_core::{
    cell_color, max_abs_diff, partition_rows, sor_cell_update, sweep_color, BoundarySpec,
    CellColor, Grid, Observer, Partition, SolverConfig, StopReason,
};

pub use crate::error::{Error, Result};
pub use crate::report::{gauss_seidel_solve, jacobi_solve, solve_serial, Deadline, SolveReport};
pub use crate::scheduler::{solve_parallel, solve_parallel_with, ParallelOptions, ParallelTrace};
