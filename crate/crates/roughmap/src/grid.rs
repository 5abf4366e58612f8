//! Regular elevation grids.
//!
//! Storage is row-major with row 0 the southernmost row: the center of cell
//! `(row, col)` sits at `(x0 + (col + 0.5) * cell, y0 + (row + 0.5) * cell)`.
//! Nodata cells hold NaN internally; file formats map them to a sentinel on
//! the way out.

use crate::error::{Result, RoughError};

/// A gridded DEM or descriptor map.
#[derive(Debug, Clone, PartialEq)]
pub struct DemGrid {
    nrows: usize,
    ncols: usize,
    /// World x of the grid's west edge (left edge of column 0).
    x0: f64,
    /// World y of the grid's south edge (bottom edge of row 0).
    y0: f64,
    /// Cell size in metres; cells are square.
    cell: f64,
    /// Row-major, row 0 at the bottom. NaN marks nodata.
    data: Vec<f64>,
}

impl DemGrid {
    /// An all-nodata grid. Fails on zero dimensions or a non-positive cell.
    pub fn new(nrows: usize, ncols: usize, x0: f64, y0: f64, cell: f64) -> Result<Self> {
        if nrows == 0 || ncols == 0 {
            return Err(RoughError::InvalidGrid(format!(
                "grid dimensions must be positive, got {nrows}x{ncols}"
            )));
        }
        if !(cell > 0.0) || !cell.is_finite() {
            return Err(RoughError::InvalidGrid(format!(
                "cell size must be positive and finite, got {cell}"
            )));
        }
        if !x0.is_finite() || !y0.is_finite() {
            return Err(RoughError::InvalidGrid("non-finite origin".into()));
        }
        Ok(Self {
            nrows,
            ncols,
            x0,
            y0,
            cell,
            data: vec![f64::NAN; nrows * ncols],
        })
    }

    /// Build from existing row-major data (row 0 at the bottom).
    pub fn from_data(
        nrows: usize,
        ncols: usize,
        x0: f64,
        y0: f64,
        cell: f64,
        data: Vec<f64>,
    ) -> Result<Self> {
        if data.len() != nrows * ncols {
            return Err(RoughError::InvalidGrid(format!(
                "data length {} does not match {nrows}x{ncols}",
                data.len()
            )));
        }
        let mut g = Self::new(nrows, ncols, x0, y0, cell)?;
        g.data = data;
        Ok(g)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn y0(&self) -> f64 {
        self.y0
    }

    pub fn cell(&self) -> f64 {
        self.cell
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.data[row * self.ncols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.data[row * self.ncols + col] = v;
    }

    #[inline]
    pub fn is_nodata(&self, row: usize, col: usize) -> bool {
        self.get(row, col).is_nan()
    }

    /// World coordinates of a cell center.
    #[inline]
    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        (
            self.x0 + (col as f64 + 0.5) * self.cell,
            self.y0 + (row as f64 + 0.5) * self.cell,
        )
    }

    /// Count of cells holding a value.
    pub fn valid_count(&self) -> usize {
        self.data.iter().filter(|v| !v.is_nan()).count()
    }

    /// Minimum and maximum over valid cells, or None when all cells are
    /// nodata.
    pub fn value_range(&self) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut any = false;
        for &v in &self.data {
            if !v.is_nan() {
                any = true;
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        any.then_some((lo, hi))
    }

    /// Mean over valid cells, or None when all cells are nodata.
    pub fn mean(&self) -> Option<f64> {
        let mut sum = 0.0;
        let mut n = 0usize;
        for &v in &self.data {
            if !v.is_nan() {
                sum += v;
                n += 1;
            }
        }
        (n > 0).then(|| sum / n as f64)
    }

    /// Sample standard deviation over valid cells (n-1 denominator); None
    /// when fewer than two valid cells.
    pub fn stddev(&self) -> Option<f64> {
        let mean = self.mean()?;
        let mut ss = 0.0;
        let mut n = 0usize;
        for &v in &self.data {
            if !v.is_nan() {
                ss += (v - mean) * (v - mean);
                n += 1;
            }
        }
        (n >= 2).then(|| (ss / (n as f64 - 1.0)).sqrt())
    }

    /// True when the two grids share dimensions, origin (within 1e-9 cell)
    /// and cell size.
    pub fn same_georef(&self, other: &DemGrid) -> bool {
        let tol = 1e-9 * self.cell;
        self.nrows == other.nrows
            && self.ncols == other.ncols
            && (self.x0 - other.x0).abs() <= tol
            && (self.y0 - other.y0).abs() <= tol
            && (self.cell - other.cell).abs() <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_starts_all_nodata() {
        let g = DemGrid::new(3, 4, 10.0, 20.0, 2.0).unwrap();
        assert_eq!(g.valid_count(), 0);
        assert!(g.is_nodata(0, 0));
        assert!(g.value_range().is_none());
        assert!(g.mean().is_none());
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(DemGrid::new(0, 4, 0.0, 0.0, 1.0).is_err());
        assert!(DemGrid::new(4, 0, 0.0, 0.0, 1.0).is_err());
        assert!(DemGrid::new(4, 4, 0.0, 0.0, 0.0).is_err());
        assert!(DemGrid::new(4, 4, 0.0, 0.0, -1.0).is_err());
        assert!(DemGrid::new(4, 4, f64::NAN, 0.0, 1.0).is_err());
    }

    #[test]
    fn cell_centers_bottom_up() {
        let g = DemGrid::new(3, 4, 100.0, 200.0, 2.0).unwrap();
        // Row 0 is the southern edge.
        assert_eq!(g.cell_center(0, 0), (101.0, 201.0));
        assert_eq!(g.cell_center(2, 3), (107.0, 205.0));
    }

    #[test]
    fn get_set_round_trip() {
        let mut g = DemGrid::new(2, 2, 0.0, 0.0, 1.0).unwrap();
        g.set(1, 0, 42.5);
        assert_eq!(g.get(1, 0), 42.5);
        assert_eq!(g.valid_count(), 1);
        assert_eq!(g.value_range(), Some((42.5, 42.5)));
    }

    #[test]
    fn stats_ignore_nodata() {
        let mut g = DemGrid::new(2, 2, 0.0, 0.0, 1.0).unwrap();
        g.set(0, 0, 1.0);
        g.set(0, 1, 2.0);
        g.set(1, 0, 3.0);
        assert_eq!(g.mean(), Some(2.0));
        assert_eq!(g.value_range(), Some((1.0, 3.0)));
        // stdev of {1,2,3} with n-1: sqrt(1) = 1.
        assert!((g.stddev().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stddev_needs_two_values() {
        let mut g = DemGrid::new(2, 2, 0.0, 0.0, 1.0).unwrap();
        assert!(g.stddev().is_none());
        g.set(0, 0, 5.0);
        assert!(g.stddev().is_none());
        g.set(1, 1, 5.0);
        assert_eq!(g.stddev(), Some(0.0));
    }

    #[test]
    fn from_data_checks_length() {
        assert!(DemGrid::from_data(2, 2, 0.0, 0.0, 1.0, vec![0.0; 3]).is_err());
        let g = DemGrid::from_data(2, 2, 0.0, 0.0, 1.0, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(g.get(0, 1), 2.0);
        assert_eq!(g.get(1, 0), 3.0);
    }

    #[test]
    fn georef_comparison() {
        let a = DemGrid::new(3, 3, 0.0, 0.0, 1.0).unwrap();
        let b = DemGrid::new(3, 3, 0.0, 0.0, 1.0).unwrap();
        let c = DemGrid::new(3, 3, 0.5, 0.0, 1.0).unwrap();
        let d = DemGrid::new(4, 3, 0.0, 0.0, 1.0).unwrap();
        assert!(a.same_georef(&b));
        assert!(!a.same_georef(&c));
        assert!(!a.same_georef(&d));
    }
}
