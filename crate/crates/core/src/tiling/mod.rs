//! Thread-block tiling of point-sets: the block model, the cost model, poset
//! tiling with stretch selection, the row-patch baseline, closed-form cover
//! counts and an exhaustive optimal-cover search.
//!
//! A block of `m × n` threads has `m` thread rows (its y extent) and `n` thread
//! columns (its x extent). Thread `(i, j)` with `i < n`, `j < m` computes the
//! point `anchor + (i·s, j·s)`.

mod bruteforce;
mod closed_form;
mod cost;
mod naive;
mod poset;

use std::collections::HashSet;
use std::fmt::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::masks::{Point, PointSet};

pub use bruteforce::{optimal_tile_bruteforce, BruteForce, DEFAULT_STATE_BUDGET};
pub use closed_form::{
    cover_count_closed_form, predicted_cover_count, predicted_naive_lambda, structured_polygon,
};
pub use cost::{cost_metrics, CostReport};
pub use naive::naive_tile;
pub use poset::{
    frontier_top, poset_tile, poset_tile_hinted, poset_tile_with_stretch, select_stretch,
    stretch_factor_selection, StretchCandidate, StretchChoice, DEFAULT_STRETCH_BUDGET,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ThreadBlock {
    pub anchor: Point,
    pub stretch: usize,
    /// Thread rows (y extent).
    pub m: usize,
    /// Thread columns (x extent).
    pub n: usize,
}

impl ThreadBlock {
    pub fn new(anchor: Point, stretch: usize, m: usize, n: usize) -> Self {
        assert!(
            stretch >= 1 && m >= 1 && n >= 1,
            "block dimensions and stretch must be positive"
        );
        Self {
            anchor,
            stretch,
            m,
            n,
        }
    }

    /// Point computed by thread `(i, j)`: column offset `i < n`, row offset `j < m`.
    #[inline]
    pub fn thread_point(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.anchor.x + i * self.stretch,
            self.anchor.y + j * self.stretch,
        )
    }

    /// All `m·n` lattice points, thread-row by thread-row.
    pub fn comp_points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.m).flat_map(move |j| (0..self.n).map(move |i| self.thread_point(i, j)))
    }
}

impl fmt::Display for ThreadBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.anchor.x, self.anchor.y, self.stretch)
    }
}

/// The lattice computed by a block, clipped to the `width × height` grid of
/// `grid`. Points past the grid edge are still threads of the block but can never
/// be mask points.
pub fn comp(tb: &ThreadBlock, grid: &PointSet) -> PointSet {
    let mut out = PointSet::empty(grid.width(), grid.height());
    for p in tb.comp_points() {
        if p.x < grid.width() && p.y < grid.height() {
            out.insert(p);
        }
    }
    out
}

/// `Comp(tb) ∩ p`.
pub fn cov(tb: &ThreadBlock, p: &PointSet) -> PointSet {
    let mut out = PointSet::empty(p.width(), p.height());
    for q in tb.comp_points() {
        if p.contains(q) {
            out.insert(q);
        }
    }
    out
}

/// Number of points of `p` a block covers.
pub fn cov_count(tb: &ThreadBlock, p: &PointSet) -> usize {
    tb.comp_points().filter(|&q| p.contains(q)).count()
}

/// A set of uniformly shaped blocks together with the point-set they cover.
#[derive(Clone, Debug, PartialEq)]
pub struct Arrangement {
    blocks: Vec<ThreadBlock>,
    m: usize,
    n: usize,
    point_set: PointSet,
}

impl Arrangement {
    /// Wraps blocks without checking coverage; see [`Arrangement::verify_cover`].
    pub fn new(point_set: PointSet, m: usize, n: usize, blocks: Vec<ThreadBlock>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::Shape(format!(
                "block shape must be positive, got {m}x{n}"
            )));
        }
        if let Some(b) = blocks.iter().find(|b| b.m != m || b.n != n) {
            return Err(Error::Shape(format!(
                "block {b} is {}x{}, arrangement is {m}x{n}",
                b.m, b.n
            )));
        }
        Ok(Self {
            blocks,
            m,
            n,
            point_set,
        })
    }

    pub fn blocks(&self) -> &[ThreadBlock] {
        &self.blocks
    }

    pub fn point_set(&self) -> &PointSet {
        &self.point_set
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Block count λ.
    pub fn lambda(&self) -> usize {
        self.blocks.len()
    }

    /// The common stretch when all blocks share one.
    pub fn uniform_stretch(&self) -> Option<usize> {
        let s = self.blocks.first()?.stretch;
        self.blocks.iter().all(|b| b.stretch == s).then_some(s)
    }

    pub fn anchors(&self) -> Vec<Point> {
        self.blocks.iter().map(|b| b.anchor).collect()
    }

    /// Checks `⋃ Cov = P`, reporting the first uncovered point in row-major order.
    pub fn verify_cover(&self) -> Result<()> {
        let mut left = self.point_set.clone();
        for b in &self.blocks {
            for q in b.comp_points() {
                left.remove(q);
            }
        }
        let first = left.iter().next();
        match first {
            None => Ok(()),
            Some(p) => Err(Error::Coverage { x: p.x, y: p.y }),
        }
    }

    /// Distinct computed points that are not in `P`, including points past the grid
    /// edge (φ_TD).
    pub fn divergent_points(&self) -> usize {
        let (w, h) = (self.point_set.width(), self.point_set.height());
        let mut inside = PointSet::empty(w, h);
        let mut outside: HashSet<Point> = HashSet::new();
        for b in &self.blocks {
            for q in b.comp_points() {
                if q.x < w && q.y < h {
                    if !self.point_set.contains(q) {
                        inside.insert(q);
                    }
                } else {
                    outside.insert(q);
                }
            }
        }
        inside.len() + outside.len()
    }

    /// One line per block: `anchor_x anchor_y stretch`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for b in &self.blocks {
            let _ = writeln!(s, "{b}");
        }
        s
    }
}
