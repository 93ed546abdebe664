/// Row-major bit grid backing both [`Mask`](super::Mask) and [`PointSet`](super::PointSet).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub(crate) struct BitGrid {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    words: Vec<u64>,
}

impl BitGrid {
    pub(crate) fn new(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(64);
        Self {
            rows,
            cols,
            words_per_row,
            words: vec![0; rows * words_per_row],
        }
    }

    #[inline]
    pub(crate) fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub(crate) fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub(crate) fn get(&self, x: usize, y: usize) -> bool {
        if x >= self.cols || y >= self.rows {
            return false;
        }
        let w = self.words[y * self.words_per_row + x / 64];
        (w >> (x % 64)) & 1 == 1
    }

    /// Sets the bit and reports whether it changed.
    #[inline]
    pub(crate) fn set(&mut self, x: usize, y: usize, on: bool) -> bool {
        debug_assert!(x < self.cols && y < self.rows);
        let w = &mut self.words[y * self.words_per_row + x / 64];
        let bit = 1u64 << (x % 64);
        let was = *w & bit != 0;
        if on {
            *w |= bit;
        } else {
            *w &= !bit;
        }
        was != on
    }

    pub(crate) fn row_words(&self, y: usize) -> &[u64] {
        &self.words[y * self.words_per_row..(y + 1) * self.words_per_row]
    }

    pub(crate) fn count_row(&self, y: usize) -> usize {
        self.row_words(y)
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    pub(crate) fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// First set column in row `y` at or after `from`.
    pub(crate) fn first_from(&self, y: usize, from: usize) -> Option<usize> {
        if from >= self.cols {
            return None;
        }
        let row = self.row_words(y);
        let mut wi = from / 64;
        let mut word = row[wi] & (!0u64 << (from % 64));
        loop {
            if word != 0 {
                return Some(wi * 64 + word.trailing_zeros() as usize);
            }
            wi += 1;
            if wi >= row.len() {
                return None;
            }
            word = row[wi];
        }
    }

    pub(crate) fn row_iter(&self, y: usize) -> RowBits<'_> {
        RowBits {
            words: self.row_words(y),
            wi: 0,
            cur: self.row_words(y).first().copied().unwrap_or(0),
        }
    }
}

/// Iterator over set columns of one grid row, ascending.
pub(crate) struct RowBits<'a> {
    words: &'a [u64],
    wi: usize,
    cur: u64,
}

impl Iterator for RowBits<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.cur != 0 {
                let bit = self.cur.trailing_zeros() as usize;
                self.cur &= self.cur - 1;
                return Some(self.wi * 64 + bit);
            }
            self.wi += 1;
            if self.wi >= self.words.len() {
                return None;
            }
            self.cur = self.words[self.wi];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_from_crosses_word_boundaries() {
        let mut g = BitGrid::new(2, 150);
        g.set(3, 0, true);
        g.set(130, 0, true);
        assert_eq!(g.first_from(0, 0), Some(3));
        assert_eq!(g.first_from(0, 4), Some(130));
        assert_eq!(g.first_from(0, 131), None);
        assert_eq!(g.first_from(1, 0), None);
        assert_eq!(g.row_iter(0).collect::<Vec<_>>(), vec![3, 130]);
        assert_eq!(g.count(), 2);
    }
}
