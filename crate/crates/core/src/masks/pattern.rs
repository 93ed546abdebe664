use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Mask;
use crate::error::{Error, Result};

/// The three canonical regular attention patterns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternKind {
    /// `|x − y| ≤ w` (band around the diagonal).
    Windowed,
    /// `⌊x/w⌋ = ⌊y/w⌋` (block diagonal).
    Blocked,
    /// `x ≡ y (mod X)`.
    Strided,
}

impl PatternKind {
    pub const ALL: [PatternKind; 3] = [
        PatternKind::Windowed,
        PatternKind::Blocked,
        PatternKind::Strided,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PatternKind::Windowed => "windowed",
            PatternKind::Blocked => "blocked",
            PatternKind::Strided => "strided",
        }
    }

    /// Polygonal patterns have no gaps inside a row.
    pub fn is_polygonal(self) -> bool {
        !matches!(self, PatternKind::Strided)
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PatternKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "windowed" | "window" => Ok(PatternKind::Windowed),
            "blocked" | "block" => Ok(PatternKind::Blocked),
            "strided" | "stride" => Ok(PatternKind::Strided),
            other => Err(Error::InvalidSpec(format!(
                "unknown pattern kind `{other}`"
            ))),
        }
    }
}

/// A canonical pattern instance: kind, its single parameter, and the square size.
///
/// `param` is the window radius, the block size or the stride depending on `kind`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PatternSpec {
    pub kind: PatternKind,
    pub param: usize,
    pub seq_len: usize,
}

impl PatternSpec {
    pub fn new(kind: PatternKind, param: usize, seq_len: usize) -> Result<Self> {
        let spec = Self {
            kind,
            param,
            seq_len,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn windowed(w: usize, seq_len: usize) -> Result<Self> {
        Self::new(PatternKind::Windowed, w, seq_len)
    }

    pub fn blocked(w: usize, seq_len: usize) -> Result<Self> {
        Self::new(PatternKind::Blocked, w, seq_len)
    }

    pub fn strided(stride: usize, seq_len: usize) -> Result<Self> {
        Self::new(PatternKind::Strided, stride, seq_len)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seq_len == 0 {
            return Err(Error::InvalidSpec("seq_len must be positive".into()));
        }
        if self.param == 0 || self.param > self.seq_len {
            return Err(Error::InvalidSpec(format!(
                "{} parameter must lie in 1..={}, got {}",
                self.kind, self.seq_len, self.param
            )));
        }
        Ok(())
    }

    /// Membership rule for the point `(x, y)`.
    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        if x >= self.seq_len || y >= self.seq_len {
            return false;
        }
        match self.kind {
            PatternKind::Windowed => x.abs_diff(y) <= self.param,
            PatternKind::Blocked => x / self.param == y / self.param,
            PatternKind::Strided => x % self.param == y % self.param,
        }
    }

    /// Non-zeros in row `y`, computed without materializing the mask.
    pub fn row_nnz(&self, y: usize) -> usize {
        let n = self.seq_len;
        let p = self.param;
        match self.kind {
            PatternKind::Windowed => (y + p).min(n - 1) - y.saturating_sub(p) + 1,
            PatternKind::Blocked => ((y / p + 1) * p).min(n) - (y / p) * p,
            PatternKind::Strided => (n - 1 - y % p) / p + 1,
        }
    }

    pub fn nnz(&self) -> usize {
        (0..self.seq_len).map(|y| self.row_nnz(y)).sum()
    }

    pub fn density(&self) -> f64 {
        self.nnz() as f64 / (self.seq_len * self.seq_len) as f64
    }
}

impl fmt::Display for PatternSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}) seq_len={}", self.kind, self.param, self.seq_len)
    }
}

/// Materializes the mask of a pattern spec.
pub fn generate_pattern(spec: &PatternSpec) -> Result<Mask> {
    spec.validate()?;
    Mask::from_fn(spec.seq_len, spec.seq_len, |y, x| spec.contains(x, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(m: &Mask) -> Vec<Vec<usize>> {
        (0..m.n_rows())
            .map(|y| m.row_nonzeros(y).collect())
            .collect()
    }

    #[test]
    fn blocked_two_by_two_diagonal_blocks() {
        let m = generate_pattern(&PatternSpec::blocked(2, 4).unwrap()).unwrap();
        assert_eq!(
            rows(&m),
            vec![vec![0, 1], vec![0, 1], vec![2, 3], vec![2, 3]]
        );
    }

    #[test]
    fn strided_two_has_eight_points() {
        let m = generate_pattern(&PatternSpec::strided(2, 4).unwrap()).unwrap();
        assert_eq!(m.nnz(), 8);
        for y in 0..4 {
            for x in 0..4 {
                assert_eq!(m.get(y, x), (x + 4 - y) % 2 == 0);
            }
        }
    }

    #[test]
    fn windowed_radius_one_rows() {
        let m = generate_pattern(&PatternSpec::windowed(1, 4).unwrap()).unwrap();
        let r = rows(&m);
        assert_eq!(r[0], vec![0, 1]);
        assert_eq!(r[1], vec![0, 1, 2]);
        assert_eq!(r[3], vec![2, 3]);
    }

    #[test]
    fn out_of_range_parameters_rejected() {
        assert!(matches!(
            PatternSpec::windowed(0, 4),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(
            PatternSpec::strided(5, 4),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(
            PatternSpec::blocked(1, 0),
            Err(Error::InvalidSpec(_))
        ));
        let bad = PatternSpec {
            kind: PatternKind::Blocked,
            param: 9,
            seq_len: 8,
        };
        assert!(generate_pattern(&bad).is_err());
    }

    #[test]
    fn row_counts_match_materialized_masks() {
        for n in 1..=24 {
            for p in 1..=n {
                for kind in PatternKind::ALL {
                    let spec = PatternSpec::new(kind, p, n).unwrap();
                    let m = generate_pattern(&spec).unwrap();
                    for y in 0..n {
                        assert_eq!(spec.row_nnz(y), m.row_nnz(y), "{spec} row {y}");
                    }
                    assert_eq!(spec.nnz(), m.nnz());
                }
            }
        }
    }

    #[test]
    fn kind_parses_from_cli_names() {
        assert_eq!(
            "Windowed".parse::<PatternKind>().unwrap(),
            PatternKind::Windowed
        );
        assert_eq!(
            "strided".parse::<PatternKind>().unwrap(),
            PatternKind::Strided
        );
        assert!("diagonal".parse::<PatternKind>().is_err());
    }
}
