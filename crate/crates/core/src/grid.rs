//! Square temperature field with a fixed boundary ring.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut, Range};

use crate::solver::kernel;
use crate::Error;

/// Checkerboard class of a cell. Red cells have `i + j` even.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CellColor {
    Red,
    Black,
}

impl CellColor {
    /// `0` for red, `1` for black: the value of `(i + j) % 2` for cells of this color.
    #[inline]
    pub const fn parity(self) -> usize {
        match self {
            CellColor::Red => 0,
            CellColor::Black => 1,
        }
    }

    pub const fn other(self) -> CellColor {
        match self {
            CellColor::Red => CellColor::Black,
            CellColor::Black => CellColor::Red,
        }
    }
}

/// Color of cell `(i, j)`.
#[inline]
pub const fn cell_color(i: usize, j: usize) -> CellColor {
    if (i + j).is_multiple_of(2) {
        CellColor::Red
    } else {
        CellColor::Black
    }
}

/// Constant temperature on each side of the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundarySpec {
    pub north: f64,
    pub south: f64,
    pub east: f64,
    pub west: f64,
}

impl BoundarySpec {
    pub const fn uniform(value: f64) -> Self {
        BoundarySpec {
            north: value,
            south: value,
            east: value,
            west: value,
        }
    }

    /// North side at 1.0, the other three at 0.0.
    pub const fn north_hot() -> Self {
        BoundarySpec {
            north: 1.0,
            south: 0.0,
            east: 0.0,
            west: 0.0,
        }
    }

    fn validate(&self) -> Result<(), Error> {
        let all = [self.north, self.south, self.east, self.west];
        if all.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite {
                what: "boundary temperature",
            })
        }
    }
}

impl Default for BoundarySpec {
    fn default() -> Self {
        Self::north_hot()
    }
}

/// An `n x n` temperature field stored row-major. Row 0 is the north edge,
/// row `n - 1` the south edge, column 0 the west edge.
///
/// The outermost ring holds the boundary condition; the solvers only ever
/// write interior cells. Corner cells take the north (row 0) or south
/// (row `n - 1`) value.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n: usize,
    values: Vec<f64>,
}

impl Grid {
    pub fn new(n: usize, boundary: BoundarySpec, interior_init: f64) -> Result<Self, Error> {
        if n < 3 {
            return Err(Error::GridTooSmall { n });
        }
        boundary.validate()?;
        if !interior_init.is_finite() {
            return Err(Error::NonFinite {
                what: "interior initial temperature",
            });
        }
        let mut values = vec![interior_init; n * n];
        for i in 0..n {
            values[i * n] = boundary.west;
            values[i * n + n - 1] = boundary.east;
        }
        // rows last so corners get the north/south value
        values[..n].fill(boundary.north);
        values[(n - 1) * n..].fill(boundary.south);
        Ok(Grid { n, values })
    }

    /// Wraps an existing row-major field.
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self, Error> {
        if n < 3 {
            return Err(Error::GridTooSmall { n });
        }
        if values.len() != n * n {
            return Err(Error::LengthMismatch {
                expected: n * n,
                actual: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "grid value" });
        }
        Ok(Grid { n, values })
    }

    /// Full side length, boundary ring included.
    #[inline]
    pub fn side(&self) -> usize {
        self.n
    }

    /// Interior row indices, `1..n - 1`.
    #[inline]
    pub fn interior_rows(&self) -> Range<usize> {
        1..self.n - 1
    }

    #[inline]
    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.n - 1 || j == self.n - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Overwrites this grid with `src` without reallocating.
    ///
    /// # Panics
    /// If the sides differ.
    pub fn copy_from(&mut self, src: &Grid) {
        assert_eq!(self.n, src.n, "copy_from between grids of different sides");
        self.values.copy_from_slice(&src.values);
    }

    /// True when the boundary rings of both grids are bitwise equal.
    pub fn boundary_bits_eq(&self, other: &Grid) -> bool {
        if self.n != other.n {
            return false;
        }
        let n = self.n;
        (0..n).all(|k| {
            [(0, k), (n - 1, k), (k, 0), (k, n - 1)]
                .iter()
                .all(|&(i, j)| self[(i, j)].to_bits() == other[(i, j)].to_bits())
        })
    }

    /// Bitwise equality of every cell (distinguishes `0.0` from `-0.0`).
    pub fn bits_eq(&self, other: &Grid) -> bool {
        self.n == other.n
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Unsynchronized handle for concurrent sweeps over disjoint row ranges.
    pub fn as_raw(&mut self) -> RawGrid {
        RawGrid {
            ptr: self.values.as_mut_ptr(),
            n: self.n,
        }
    }
}

impl Index<(usize, usize)> for Grid {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        assert!(j < self.n, "column {j} out of range");
        &self.values[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Grid {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        assert!(j < self.n, "column {j} out of range");
        &mut self.values[i * self.n + j]
    }
}

/// Raw view of a [`Grid`] shared between the workers of one color phase.
///
/// During a phase, a worker writes only cells of the phase color inside its own
/// rows and reads only cells of the other color (plus the boundary ring). Rows
/// adjacent to a block are read but never written by the reading worker, so
/// concurrent sweeps of the same color over disjoint row ranges touch disjoint
/// memory for every write.
#[derive(Debug, Clone, Copy)]
pub struct RawGrid {
    ptr: *mut f64,
    n: usize,
}

// SAFETY: the pointer is only dereferenced through the unsafe sweep methods,
// whose contract rules out conflicting accesses.
unsafe impl Send for RawGrid {}
unsafe impl Sync for RawGrid {}

impl RawGrid {
    pub fn side(&self) -> usize {
        self.n
    }

    /// Relaxes every `color` cell in `rows`.
    ///
    /// # Safety
    /// The source grid must outlive the call and must not be accessed except by
    /// other `sweep_rows*` calls for the same `color` on row ranges disjoint
    /// from `rows`. `rows` must lie within `1..n - 1`.
    pub unsafe fn sweep_rows(&self, color: CellColor, omega: f64, rows: Range<usize>) {
        assert!(rows.start >= 1 && rows.end < self.n || rows.is_empty());
        kernel::sweep(self.ptr, self.n, color, omega, rows, |_, _| {});
    }

    /// Same as [`RawGrid::sweep_rows`], reporting every written cell to `on_write`.
    ///
    /// # Safety
    /// See [`RawGrid::sweep_rows`].
    pub unsafe fn sweep_rows_logged<F: FnMut(usize, usize)>(
        &self,
        color: CellColor,
        omega: f64,
        rows: Range<usize>,
        on_write: F,
    ) {
        assert!(rows.start >= 1 && rows.end < self.n || rows.is_empty());
        kernel::sweep(self.ptr, self.n, color, omega, rows, on_write);
    }
}
