use super::{Arrangement, ThreadBlock};
use crate::masks::{Point, PointSet};

/// Row-patch baseline: split the rows into patches of `m` consecutive rows and
/// lay unit-stretch blocks left to right across each patch, starting at its
/// leftmost point, until the patch's column extent is covered.
pub fn naive_tile(p: &PointSet, m: usize, n: usize) -> Arrangement {
    let mut blocks = Vec::new();
    for top in (0..p.height()).step_by(m) {
        let rows = top..(top + m).min(p.height());
        let mut lo = usize::MAX;
        let mut hi = 0;
        for y in rows {
            if let Some(first) = p.first_in_row_from(y, 0) {
                lo = lo.min(first);
                hi = hi.max(p.row(y).last().unwrap_or(first));
            }
        }
        if lo == usize::MAX {
            continue;
        }
        let count = (hi - lo + 1).div_ceil(n);
        blocks.extend((0..count).map(|k| ThreadBlock::new(Point::new(lo + k * n, top), 1, m, n)));
    }
    let arr = Arrangement::new(p.clone(), m, n, blocks).expect("uniform block shape");
    debug_assert!(arr.verify_cover().is_ok());
    arr
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::masks::{generate_pattern, Mask, PatternSpec};

    #[test]
    fn full_grid_partition() {
        let p = Mask::full(4, 4).unwrap().point_set();
        let arr = naive_tile(&p, 2, 2);
        let a: Vec<_> = arr.anchors().iter().map(|a| (a.x, a.y)).collect();
        assert_eq!(a, vec![(0, 0), (2, 0), (0, 2), (2, 2)]);
    }

    #[test]
    fn windowed_radius_one_eight_rows() {
        let p = generate_pattern(&PatternSpec::windowed(1, 8).unwrap())
            .unwrap()
            .point_set();
        let arr = naive_tile(&p, 2, 2);
        assert_eq!(arr.lambda(), 8);
        assert!(arr.verify_cover().is_ok());
    }

    #[test]
    fn skips_empty_patches() {
        let p = Mask::from_fn(6, 6, |y, x| y < 2 && x == 3)
            .unwrap()
            .point_set();
        let arr = naive_tile(&p, 2, 2);
        assert_eq!(arr.anchors(), vec![Point::new(3, 0)]);
    }
}
