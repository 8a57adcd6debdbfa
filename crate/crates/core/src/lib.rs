//! Red-black successive over-relaxation for the 2D steady-state heat problem.
//!
//! This crate is `no_std` (it needs `alloc`) and holds everything that does not
//! touch threads, clocks or files: the temperature [`Grid`], the five-point SOR
//! kernel, the iteration driver shared by the serial and parallel solvers, the
//! Jacobi reference solver and the row partitioner.
//!
//! Parallel execution plugs into the driver through [`PhaseExecutor`]; the
//! `sor` crate provides a thread-pool implementation.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;
pub mod grid;
pub mod partition;
pub mod solver;

pub use crate::error::Error;
pub use crate::grid::{cell_color, BoundarySpec, CellColor, Grid, RawGrid};
pub use crate::partition::{partition_rows, Partition, RowBlock};
pub use crate::solver::{
    gauss_seidel, jacobi, max_abs_diff, run_red_black, solve_serial, sor_cell_update, sweep_color,
    Convergence, Observer, PhaseExecutor, SerialExecutor, SolverConfig, StopReason,
};
