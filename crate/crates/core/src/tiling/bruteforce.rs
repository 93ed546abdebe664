use std::collections::HashMap;

use num_rational::Ratio;

use super::{Arrangement, ThreadBlock};
use crate::error::{Error, Result};
use crate::masks::{Point, PointSet};

/// Default cap on search nodes visited per stretch.
pub const DEFAULT_STATE_BUDGET: usize = 2_000_000;

/// Exhaustive minimum-cost cover search for small point-sets.
///
/// Every arrangement it considers uses one stretch for all blocks, so its cost is
/// `λ·s`. For each candidate stretch it finds the fewest blocks that cover the
/// point-set by iterative deepening: the first uncovered point in row-major order
/// must be computed by some block, and among the blocks that compute it the one
/// whose top thread row passes through it computes a superset of the still
/// useful points, so only the `n` horizontal placements of that row are tried.
/// Depth is bounded below by `⌈uncovered / (m·n)⌉`.
#[derive(Clone, Copy, Debug)]
pub struct BruteForce {
    pub state_budget: usize,
}

impl Default for BruteForce {
    fn default() -> Self {
        Self {
            state_budget: DEFAULT_STATE_BUDGET,
        }
    }
}

impl BruteForce {
    pub fn solve(
        &self,
        p: &PointSet,
        m: usize,
        n: usize,
        stretch_candidates: &[usize],
    ) -> Result<Arrangement> {
        if stretch_candidates.is_empty() || stretch_candidates.contains(&0) {
            return Err(Error::InvalidSpec(
                "stretch candidates must be non-empty and positive".into(),
            ));
        }
        if m == 0 || n == 0 {
            return Err(Error::Shape(format!(
                "block shape must be positive, got {m}x{n}"
            )));
        }
        let mut best: Option<(Ratio<i64>, Vec<ThreadBlock>)> = None;
        for &s in stretch_candidates {
            let cap = best
                .as_ref()
                .map(|(c, _)| (*c / s as i64).to_integer() as usize);
            let mut search = Search::new(p, m, n, s, self.state_budget);
            let Some(anchors) = search.min_cover(cap)? else {
                continue;
            };
            let cost = Ratio::from_integer((anchors.len() * s) as i64);
            let better = match &best {
                None => true,
                Some((c, b)) => cost < *c || (cost == *c && anchors.len() < b.len()),
            };
            if better {
                let blocks = anchors
                    .into_iter()
                    .map(|a| ThreadBlock::new(a, s, m, n))
                    .collect();
                best = Some((cost, blocks));
            }
        }
        let (_, blocks) = best.expect("first candidate always yields a cover");
        Arrangement::new(p.clone(), m, n, blocks)
    }
}

/// Minimum-cost arrangement over the given stretches with the default budget.
pub fn optimal_tile_bruteforce(
    p: &PointSet,
    m: usize,
    n: usize,
    stretch_candidates: &[usize],
) -> Result<Arrangement> {
    BruteForce::default().solve(p, m, n, stretch_candidates)
}

struct Search {
    width: usize,
    height: usize,
    m: usize,
    n: usize,
    stretch: usize,
    words: usize,
    start: Vec<u64>,
    /// Failed searches: state → largest depth budget proven insufficient.
    failed: HashMap<Vec<u64>, usize>,
    visited: usize,
    budget: usize,
}

impl Search {
    fn new(p: &PointSet, m: usize, n: usize, stretch: usize, budget: usize) -> Self {
        let (width, height) = (p.width(), p.height());
        let words = (width * height).div_ceil(64).max(1);
        let mut start = vec![0u64; words];
        for q in p.iter() {
            let i = q.y * width + q.x;
            start[i / 64] |= 1 << (i % 64);
        }
        Self {
            width,
            height,
            m,
            n,
            stretch,
            words,
            start,
            failed: HashMap::new(),
            visited: 0,
            budget,
        }
    }

    fn remaining(state: &[u64]) -> usize {
        state.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn lower_bound(&self, state: &[u64]) -> usize {
        Self::remaining(state).div_ceil(self.m * self.n)
    }

    fn pivot(state: &[u64]) -> Option<usize> {
        state
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    fn clear_block(&self, state: &mut [u64], anchor: Point) {
        for j in 0..self.m {
            let y = anchor.y + j * self.stretch;
            if y >= self.height {
                break;
            }
            for i in 0..self.n {
                let x = anchor.x + i * self.stretch;
                if x >= self.width {
                    break;
                }
                let idx = y * self.width + x;
                state[idx / 64] &= !(1 << (idx % 64));
            }
        }
    }

    /// Fewest anchors covering everything, or `None` if more than `cap` are needed.
    fn min_cover(&mut self, cap: Option<usize>) -> Result<Option<Vec<Point>>> {
        let start = self.start.clone();
        let mut depth = self.lower_bound(&start);
        let mut path = Vec::new();
        loop {
            if cap.is_some_and(|c| depth > c) {
                return Ok(None);
            }
            if self.dfs(&start, depth, &mut path)? {
                path.reverse();
                return Ok(Some(path));
            }
            depth += 1;
        }
    }

    fn dfs(&mut self, state: &[u64], depth: usize, path: &mut Vec<Point>) -> Result<bool> {
        let Some(pivot) = Self::pivot(state) else {
            return Ok(true);
        };
        self.visited += 1;
        if self.visited > self.budget {
            return Err(Error::Budget {
                budget: self.budget,
            });
        }
        if self.lower_bound(state) > depth {
            return Ok(false);
        }
        if self.failed.get(state).is_some_and(|&d| d >= depth) {
            return Ok(false);
        }
        let (px, py) = (pivot % self.width, pivot / self.width);
        let mut next = vec![0u64; self.words];
        for i in 0..self.n {
            let Some(ax) = px.checked_sub(i * self.stretch) else {
                continue;
            };
            let anchor = Point::new(ax, py);
            next.copy_from_slice(state);
            self.clear_block(&mut next, anchor);
            if self.dfs(&next, depth - 1, path)? {
                path.push(anchor);
                return Ok(true);
            }
        }
        self.failed.insert(state.to_vec(), depth);
        Ok(false)
    }
}
