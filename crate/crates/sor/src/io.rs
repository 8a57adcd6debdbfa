//! Grid dumps: full-precision CSV and 8-bit binary PGM heatmaps.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use sor_core::Grid;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridFormat {
    /// `n` lines of `n` comma-separated values, shortest round-trip decimals.
    Csv,
    /// Binary `P5` graymap, row 0 (north) at the top.
    Pgm,
}

pub fn write_grid(grid: &Grid, format: GridFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    match format {
        GridFormat::Csv => write_csv(grid, &mut out),
        GridFormat::Pgm => write_pgm(grid, None, &mut out),
    }
    .and_then(|()| out.flush())
    .map_err(|e| Error::io(path, e))
}

pub fn write_csv<W: Write>(grid: &Grid, out: &mut W) -> std::io::Result<()> {
    for i in 0..grid.side() {
        let mut first = true;
        for v in grid.row(i) {
            if !first {
                out.write_all(b",")?;
            }
            first = false;
            // `Display` for f64 is the shortest string that parses back exactly
            write!(out, "{v}")?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Maps `clamp(v, lo, hi)` linearly onto `0..=255`, rounding to nearest.
/// `range` defaults to the grid's own min and max; a flat range maps to 0.
pub fn write_pgm<W: Write>(grid: &Grid, range: Option<(f64, f64)>, out: &mut W) -> std::io::Result<()> {
    let n = grid.side();
    let (lo, hi) = range.unwrap_or_else(|| grid.min_max());
    write!(out, "P5\n{n} {n}\n255\n")?;
    let span = hi - lo;
    let pixels: Vec<u8> = grid
        .values()
        .iter()
        .map(|&v| {
            if span > 0.0 {
                ((v.clamp(lo, hi) - lo) / span * 255.0).round() as u8
            } else {
                0
            }
        })
        .collect();
    out.write_all(&pixels)
}

pub fn read_grid_csv(path: impl AsRef<Path>) -> Result<Grid> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let row_no = k + 1;
        let row = line
            .split(',')
            .enumerate()
            .map(|(c, cell)| {
                let cell = cell.trim();
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        Error::parse(
                            path,
                            format!("row {row_no}, column {}: not a finite number: {cell:?}", c + 1),
                        )
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::parse(
                    path,
                    format!(
                        "row {row_no} has {} values, expected {}",
                        row.len(),
                        first.len()
                    ),
                ));
            }
        }
        rows.push(row);
    }
    let n = rows.len();
    if n < 3 {
        return Err(Error::parse(
            path,
            format!("grid must be at least 3x3, found {n} rows"),
        ));
    }
    if rows[0].len() != n {
        return Err(Error::parse(
            path,
            format!("grid is not square: {n} rows of {} values", rows[0].len()),
        ));
    }
    Ok(Grid::from_values(n, rows.concat())?)
}
