//! Sparsity masks, their point-set view, the canonical attention patterns and the
//! analysis passes (regularity, affine-index solving, density classification).
//!
//! A mask cell `M[y][x] = 1` corresponds to the point `(x, y)`: `x` is the column
//! (trailing dimension) and `y` the row.

mod analysis;
pub(crate) mod grid;
mod io;
mod pattern;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use grid::BitGrid;

pub use analysis::{check_regularity, density_analysis, Density, DensityClass, DEFAULT_ALPHA};
pub use io::{format_mask, parse_mask};
pub use pattern::{generate_pattern, PatternKind, PatternSpec};

/// A cartesian point: `x` is the column, `y` the row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub x: usize,
    pub y: usize,
}

impl Point {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Boolean sparsity pattern of shape `n_rows × n_cols`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mask {
    grid: BitGrid,
}

impl Mask {
    /// Builds a mask from a row-major boolean grid.
    pub fn new(n_rows: usize, n_cols: usize, bits: &[bool]) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::Shape(format!(
                "mask must be at least 1x1, got {n_rows}x{n_cols}"
            )));
        }
        if bits.len() != n_rows * n_cols {
            return Err(Error::Shape(format!(
                "expected {} mask cells for {n_rows}x{n_cols}, got {}",
                n_rows * n_cols,
                bits.len()
            )));
        }
        let mut grid = BitGrid::new(n_rows, n_cols);
        for (i, &b) in bits.iter().enumerate() {
            if b {
                grid.set(i % n_cols, i / n_cols, true);
            }
        }
        Ok(Self { grid })
    }

    /// Builds a mask from a predicate over `(row, col)`.
    pub fn from_fn(
        n_rows: usize,
        n_cols: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::Shape(format!(
                "mask must be at least 1x1, got {n_rows}x{n_cols}"
            )));
        }
        let mut grid = BitGrid::new(n_rows, n_cols);
        for y in 0..n_rows {
            for x in 0..n_cols {
                if f(y, x) {
                    grid.set(x, y, true);
                }
            }
        }
        Ok(Self { grid })
    }

    pub fn full(n_rows: usize, n_cols: usize) -> Result<Self> {
        Self::from_fn(n_rows, n_cols, |_, _| true)
    }

    /// The mask whose ones are exactly `points` (points outside the grid are rejected).
    pub fn from_points(
        n_rows: usize,
        n_cols: usize,
        points: impl IntoIterator<Item = Point>,
    ) -> Result<Self> {
        let mut m = Self::from_fn(n_rows, n_cols, |_, _| false)?;
        for p in points {
            if p.x >= n_cols || p.y >= n_rows {
                return Err(Error::Shape(format!(
                    "point {p} lies outside a {n_rows}x{n_cols} mask"
                )));
            }
            m.grid.set(p.x, p.y, true);
        }
        Ok(m)
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.grid.rows()
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.grid.cols()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.grid.get(col, row)
    }

    pub fn set(&mut self, row: usize, col: usize, on: bool) {
        self.grid.set(col, row, on);
    }

    /// Non-zero columns of `row`, ascending.
    pub fn row_nonzeros(&self, row: usize) -> impl Iterator<Item = usize> + '_ {
        self.grid.row_iter(row)
    }

    pub fn row_nnz(&self, row: usize) -> usize {
        self.grid.count_row(row)
    }

    pub fn nnz(&self) -> usize {
        self.grid.count()
    }

    pub fn density(&self) -> f64 {
        self.nnz() as f64 / (self.n_rows() * self.n_cols()) as f64
    }

    pub fn is_square(&self) -> bool {
        self.n_rows() == self.n_cols()
    }

    pub fn transpose(&self) -> Mask {
        let mut grid = BitGrid::new(self.n_cols(), self.n_rows());
        for y in 0..self.n_rows() {
            for x in self.grid.row_iter(y) {
                grid.set(y, x, true);
            }
        }
        Mask { grid }
    }

    /// The cartesian interpretation of the mask.
    pub fn point_set(&self) -> PointSet {
        PointSet {
            len: self.grid.count(),
            grid: self.grid.clone(),
        }
    }
}

impl fmt::Debug for Mask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mask {}x{}", self.n_rows(), self.n_cols())?;
        for y in 0..self.n_rows() {
            for x in 0..self.n_cols() {
                f.write_str(if self.get(y, x) { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// The set of points of a mask that are 1, bounded by the mask's grid.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PointSet {
    grid: BitGrid,
    len: usize,
}

impl PointSet {
    /// An empty point-set over a `width × height` grid (`width` columns, `height` rows).
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            grid: BitGrid::new(height, width),
            len: 0,
        }
    }

    pub fn from_points(
        width: usize,
        height: usize,
        points: impl IntoIterator<Item = Point>,
    ) -> Self {
        let mut s = Self::empty(width, height);
        for p in points {
            s.insert(p);
        }
        s
    }

    /// Number of columns of the source grid.
    #[inline]
    pub fn width(&self) -> usize {
        self.grid.cols()
    }

    /// Number of rows of the source grid.
    #[inline]
    pub fn height(&self) -> usize {
        self.grid.rows()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Membership; points outside the grid are never members.
    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        self.grid.get(p.x, p.y)
    }

    /// Inserts an in-grid point. Panics if the point is outside the grid.
    pub fn insert(&mut self, p: Point) -> bool {
        assert!(
            p.x < self.width() && p.y < self.height(),
            "point {p} outside {}x{} grid",
            self.height(),
            self.width()
        );
        let changed = self.grid.set(p.x, p.y, true);
        self.len += changed as usize;
        changed
    }

    /// Removes a point; out-of-grid points are ignored.
    pub fn remove(&mut self, p: Point) -> bool {
        if p.x >= self.width() || p.y >= self.height() {
            return false;
        }
        let changed = self.grid.set(p.x, p.y, false);
        self.len -= changed as usize;
        changed
    }

    /// Points in row-major order (by row, then column).
    pub fn iter(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.height()).flat_map(move |y| self.grid.row_iter(y).map(move |x| Point::new(x, y)))
    }

    pub fn row(&self, y: usize) -> impl Iterator<Item = usize> + '_ {
        self.grid.row_iter(y)
    }

    pub fn row_len(&self, y: usize) -> usize {
        self.grid.count_row(y)
    }

    pub(crate) fn first_in_row_from(&self, y: usize, from: usize) -> Option<usize> {
        self.grid.first_from(y, from)
    }

    /// Largest number of points in any row.
    pub fn max_row_len(&self) -> usize {
        (0..self.height())
            .map(|y| self.row_len(y))
            .max()
            .unwrap_or(0)
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.iter().all(|p| other.contains(p))
    }

    pub fn to_mask(&self) -> Result<Mask> {
        if self.width() == 0 || self.height() == 0 {
            return Err(Error::Shape("point-set grid is empty".into()));
        }
        Ok(Mask {
            grid: self.grid.clone(),
        })
    }
}
