use num_integer::Integer;
use num_rational::Ratio;

use super::{cost_metrics, Arrangement, ThreadBlock};
use crate::masks::{PatternKind, PatternSpec, Point, PointSet};

/// Cap on the stretches tried when the pattern gives no hint.
pub const DEFAULT_STRETCH_BUDGET: usize = 64;

/// Minimal points under componentwise dominance: every `p` with no other `q`
/// satisfying `q.x ≤ p.x ∧ q.y ≤ p.y`. Sorted by `(x, y)`.
///
/// Only the first point of each row can be minimal, and it is minimal exactly when
/// it lies strictly left of the first point of every earlier row.
pub fn frontier_top(remaining: &PointSet) -> Vec<Point> {
    let mut top = Vec::new();
    let mut best = usize::MAX;
    for y in 0..remaining.height() {
        if let Some(x) = remaining.first_in_row_from(y, 0) {
            if x < best {
                top.push(Point::new(x, y));
                best = x;
            }
        }
    }
    top.reverse();
    top
}

/// Poset tiling at a fixed stretch: anchor a block at every minimal uncovered point,
/// drop everything those blocks compute, repeat until nothing is left.
pub fn poset_tile_with_stretch(p: &PointSet, m: usize, n: usize, stretch: usize) -> Arrangement {
    let mut rem = p.clone();
    let mut blocks = Vec::new();
    while !rem.is_empty() {
        for t in frontier_top(&rem) {
            let tb = ThreadBlock::new(t, stretch, m, n);
            for q in tb.comp_points() {
                rem.remove(q);
            }
            blocks.push(tb);
        }
    }
    let arr = Arrangement::new(p.clone(), m, n, blocks).expect("uniform block shape");
    debug_assert!(arr.verify_cover().is_ok());
    arr
}

/// Poset tiling with the stretch picked by [`stretch_factor_selection`].
pub fn poset_tile(p: &PointSet, m: usize, n: usize) -> Arrangement {
    poset_tile_hinted(p, m, n, None)
}

pub fn poset_tile_hinted(
    p: &PointSet,
    m: usize,
    n: usize,
    hint: Option<&PatternSpec>,
) -> Arrangement {
    select_stretch(p, m, n, hint, DEFAULT_STRETCH_BUDGET).arrangement
}

/// One evaluated stretch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StretchCandidate {
    pub stretch: usize,
    pub lambda: usize,
    pub cost: Ratio<i64>,
}

#[derive(Clone, Debug)]
pub struct StretchChoice {
    pub stretch: usize,
    /// Every stretch that was tiled, in evaluation order.
    pub candidates: Vec<StretchCandidate>,
    pub arrangement: Arrangement,
}

/// The stretch poset tiling should use.
pub fn stretch_factor_selection(
    p: &PointSet,
    m: usize,
    n: usize,
    hint: Option<&PatternSpec>,
) -> usize {
    select_stretch(p, m, n, hint, DEFAULT_STRETCH_BUDGET).stretch
}

/// Picks a stretch and returns the arrangement built with it.
///
/// Polygonal point-sets (by hint, or because no row has a gap) use stretch 1.
/// Strided point-sets with stride `X` (from the hint, or the gap shared by every
/// row) try every divisor of `X`. Anything else tries `1..=budget`. Among the
/// tried stretches the lowest cost wins; ties go to the larger `gcd(s, X)`, then
/// fewer blocks, then the smaller stretch.
pub fn select_stretch(
    p: &PointSet,
    m: usize,
    n: usize,
    hint: Option<&PatternSpec>,
    budget: usize,
) -> StretchChoice {
    let (stride, candidates): (usize, Vec<usize>) = match hint.map(|h| h.kind) {
        Some(PatternKind::Windowed | PatternKind::Blocked) => (1, vec![1]),
        Some(PatternKind::Strided) => {
            let x = hint.unwrap().param;
            (x, divisors(x))
        }
        None => match row_gap(p) {
            RowGap::None => (1, vec![1]),
            RowGap::Common(g) => (g, divisors(g)),
            RowGap::Mixed => {
                let cap = budget.max(1).min(p.width().max(p.height()).max(1));
                (1, (1..=cap).collect())
            }
        },
    };

    let mut best: Option<(StretchCandidate, Arrangement)> = None;
    let mut evaluated = Vec::with_capacity(candidates.len());
    for s in candidates {
        let arr = poset_tile_with_stretch(p, m, n, s);
        let cost = cost_metrics(&arr)
            .map(|r| r.cost)
            .unwrap_or_else(|_| Ratio::from_integer(0));
        let cand = StretchCandidate {
            stretch: s,
            lambda: arr.lambda(),
            cost,
        };
        let better = match &best {
            None => true,
            Some((b, _)) => {
                let key = |c: &StretchCandidate| {
                    (
                        c.cost,
                        std::cmp::Reverse(c.stretch.gcd(&stride)),
                        c.lambda,
                        c.stretch,
                    )
                };
                key(&cand) < key(b)
            }
        };
        evaluated.push(cand.clone());
        if better {
            best = Some((cand, arr));
        }
    }
    let (b, arrangement) = best.expect("at least one candidate stretch");
    StretchChoice {
        stretch: b.stretch,
        candidates: evaluated,
        arrangement,
    }
}

enum RowGap {
    /// Every row is a contiguous run.
    None,
    /// Every row with two or more points has this constant gap.
    Common(usize),
    Mixed,
}

fn row_gap(p: &PointSet) -> RowGap {
    let mut common: Option<usize> = None;
    let mut gap_free = true;
    for y in 0..p.height() {
        let mut it = p.row(y);
        let Some(first) = it.next() else { continue };
        let Some(second) = it.next() else { continue };
        let g = second - first;
        let mut prev = second;
        for x in it {
            if x - prev != g {
                return RowGap::Mixed;
            }
            prev = x;
        }
        gap_free &= g == 1;
        match common {
            None => common = Some(g),
            Some(c) if c != g => return RowGap::Mixed,
            _ => {}
        }
    }
    match common {
        _ if gap_free => RowGap::None,
        Some(g) => RowGap::Common(g),
        None => RowGap::None,
    }
}

fn divisors(x: usize) -> Vec<usize> {
    (1..=x).filter(|d| x.is_multiple_of(*d)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::masks::{generate_pattern, Mask};

    fn set(w: usize, h: usize, v: &[(usize, usize)]) -> PointSet {
        PointSet::from_points(w, h, v.iter().map(|&(x, y)| Point::new(x, y)))
    }

    /// Pairwise dominance scan.
    fn top_oracle(p: &PointSet) -> Vec<Point> {
        let all: Vec<Point> = p.iter().collect();
        let mut out: Vec<Point> = all
            .iter()
            .copied()
            .filter(|a| !all.iter().any(|b| b != a && b.x <= a.x && b.y <= a.y))
            .collect();
        out.sort();
        out
    }

    #[test]
    fn frontier_examples() {
        assert_eq!(
            frontier_top(&set(4, 4, &[(0, 0), (1, 1)])),
            vec![Point::new(0, 0)]
        );
        assert_eq!(
            frontier_top(&set(4, 4, &[(0, 1), (1, 0)])),
            vec![Point::new(0, 1), Point::new(1, 0)]
        );
        let block = set(4, 4, &[(2, 2), (3, 2), (2, 3), (3, 3)]);
        assert_eq!(frontier_top(&block), top_oracle(&block));
        assert_eq!(frontier_top(&block), vec![Point::new(2, 2)]);
        assert!(frontier_top(&PointSet::empty(3, 3)).is_empty());
    }

    #[test]
    fn frontier_matches_dominance_scan_on_patterns() {
        for kind in PatternKind::ALL {
            for param in 1..=6 {
                let p = generate_pattern(&PatternSpec::new(kind, param, 9).unwrap())
                    .unwrap()
                    .point_set();
                let mut rem = p.clone();
                // Peel a few diagonal points to get less regular shapes too.
                for k in 0..4 {
                    rem.remove(Point::new(k, k));
                    assert_eq!(frontier_top(&rem), top_oracle(&rem));
                }
            }
        }
    }

    #[test]
    fn blocked_four_by_four() {
        let p = generate_pattern(&PatternSpec::blocked(2, 4).unwrap())
            .unwrap()
            .point_set();
        let arr = poset_tile(&p, 2, 2);
        assert_eq!(arr.anchors(), vec![Point::new(0, 0), Point::new(2, 2)]);
        assert_eq!(arr.uniform_stretch(), Some(1));
    }

    #[test]
    fn strided_four_by_four_resolves_stretch_two() {
        let p = generate_pattern(&PatternSpec::strided(2, 4).unwrap())
            .unwrap()
            .point_set();
        let choice = select_stretch(&p, 2, 2, None, DEFAULT_STRETCH_BUDGET);
        assert_eq!(choice.stretch, 2);
        assert_eq!(
            choice.arrangement.anchors(),
            vec![Point::new(0, 0), Point::new(1, 1)]
        );
        let costs: Vec<_> = choice
            .candidates
            .iter()
            .map(|c| (c.stretch, c.lambda, c.cost))
            .collect();
        assert_eq!(
            costs,
            vec![
                (1, 4, Ratio::from_integer(4)),
                (2, 2, Ratio::from_integer(4))
            ]
        );
    }

    #[test]
    fn singleton_gets_one_block() {
        let p = set(8, 8, &[(5, 7)]);
        let arr = poset_tile(&p, 2, 2);
        assert_eq!(arr.anchors(), vec![Point::new(5, 7)]);
    }

    #[test]
    fn polygonal_patterns_use_unit_stretch() {
        let spec = PatternSpec::windowed(3, 16).unwrap();
        let p = generate_pattern(&spec).unwrap().point_set();
        assert_eq!(stretch_factor_selection(&p, 4, 4, Some(&spec)), 1);
        assert_eq!(stretch_factor_selection(&p, 4, 4, None), 1);
    }

    #[test]
    fn strided_four_prefers_unit_stretch_under_the_cost_model() {
        // Oracle: tile at each divisor of 4 and compare λ·s.
        for n in [4, 8, 12] {
            let spec = PatternSpec::strided(4, n).unwrap();
            let p = generate_pattern(&spec).unwrap().point_set();
            let costs: Vec<_> = [1, 2, 4]
                .iter()
                .map(|&s| {
                    (
                        cost_metrics(&poset_tile_with_stretch(&p, 2, 2, s))
                            .unwrap()
                            .cost,
                        s,
                    )
                })
                .collect();
            let min = costs.iter().map(|c| c.0).min().unwrap();
            let chosen = stretch_factor_selection(&p, 2, 2, Some(&spec));
            assert_eq!(costs.iter().find(|c| c.1 == chosen).unwrap().0, min);
            assert_eq!(chosen, 1, "N={n}");
        }
    }

    #[test]
    fn mixed_gaps_fall_back_to_budgeted_search() {
        let m = Mask::from_fn(4, 8, |y, x| if y == 0 { x % 2 == 0 } else { x % 3 == 0 }).unwrap();
        let c = select_stretch(&m.point_set(), 2, 2, None, 5);
        assert_eq!(c.candidates.len(), 5);
        assert!(c.arrangement.verify_cover().is_ok());
    }

    #[test]
    fn poset_anchors_lie_in_the_point_set() {
        for kind in PatternKind::ALL {
            for param in [1, 2, 3, 5, 8] {
                let p = generate_pattern(&PatternSpec::new(kind, param, 24).unwrap())
                    .unwrap()
                    .point_set();
                let arr = poset_tile(&p, 4, 2);
                assert!(arr.verify_cover().is_ok());
                assert!(arr.anchors().iter().all(|&a| p.contains(a)));
            }
        }
    }
}
