//! Small row-major dense matrices with a fixed (ascending-k) summation order.

use std::fmt::{Debug, Display, Write};
use std::str::FromStr;

use num_traits::Float;

use crate::error::{Error, Result};

/// Floating-point element type used by the format and the simulator.
pub trait Element: Float + Default + Debug + Display + FromStr + Send + Sync + 'static {
    fn of_f64(v: f64) -> Self;
    fn as_f64(self) -> f64;
}

impl Element for f32 {
    fn of_f64(v: f64) -> Self {
        v as f32
    }
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Element for f64 {
    fn of_f64(v: f64) -> Self {
        v
    }
    fn as_f64(self) -> f64 {
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Element> DenseMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn map<U: Element>(&self, f: impl Fn(T) -> U) -> DenseMatrix<U> {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn cast<U: Element>(&self) -> DenseMatrix<U> {
        self.map(|v| U::of_f64(v.as_f64()))
    }

    /// `self · rhs`, each entry accumulated from zero over ascending k.
    pub fn matmul(&self, rhs: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let a = self.row(i);
            for j in 0..rhs.cols {
                let mut acc = T::zero();
                for (k, &av) in a.iter().enumerate() {
                    acc = acc + av * rhs.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Largest element-wise deviation from `reference`, relative to the reference's
    /// largest magnitude (absolute when the reference is all zeros).
    pub fn max_relative_error(&self, reference: &DenseMatrix<T>) -> Result<f64> {
        if self.rows != reference.rows || self.cols != reference.cols {
            return Err(Error::Shape("matrices differ in shape".into()));
        }
        let scale = reference.max_abs().as_f64();
        let worst = self
            .data
            .iter()
            .zip(&reference.data)
            .map(|(a, b)| (a.as_f64() - b.as_f64()).abs())
            .fold(0.0f64, f64::max);
        Ok(if scale > 0.0 { worst / scale } else { worst })
    }

    /// Bitwise equality of every element (distinguishes `0.0` and `-0.0`).
    pub fn bit_identical(&self, other: &DenseMatrix<T>) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.as_f64().to_bits() == b.as_f64().to_bits())
    }

    /// Text format: `rows cols` header, then one whitespace-separated row per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.rows, self.cols);
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (hl, header) = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            col: 1,
            msg: "missing header".into(),
        })?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line: hl + 1,
                col: 1,
                msg: format!("bad header: {e}"),
            })?;
        let [rows, cols] = dims[..] else {
            return Err(Error::Parse {
                line: hl + 1,
                col: 1,
                msg: "header must be `rows cols`".into(),
            });
        };
        let mut data = Vec::with_capacity(rows * cols);
        for (lno, line) in lines {
            for (ti, tok) in line.split_whitespace().enumerate() {
                let v = tok.parse::<T>().map_err(|_| Error::Parse {
                    line: lno + 1,
                    col: ti + 1,
                    msg: format!("bad number `{tok}`"),
                })?;
                data.push(v);
            }
        }
        Self::new(rows, cols, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_small() {
        let a = DenseMatrix::new(2, 2, vec![1.0f32, 2.0, 3.0, 4.0]).unwrap();
        let b = DenseMatrix::new(2, 1, vec![1.0f32, 1.0]).unwrap();
        assert_eq!(a.matmul(&b).unwrap().as_slice(), &[3.0, 7.0]);
        assert!(b.matmul(&b).is_err());
    }

    #[test]
    fn text_round_trip() {
        let a = DenseMatrix::from_fn(2, 3, |i, j| (i * 3 + j) as f64 * 0.5 - 1.0);
        assert_eq!(DenseMatrix::<f64>::parse_text(&a.to_text()).unwrap(), a);
        assert!(DenseMatrix::<f64>::parse_text("2 2\n1 2\n3\n").is_err());
    }

    #[test]
    fn relative_error_uses_reference_scale() {
        let r = DenseMatrix::new(1, 2, vec![10.0f64, 0.0]).unwrap();
        let a = DenseMatrix::new(1, 2, vec![10.0f64, 0.001]).unwrap();
        assert!((a.max_relative_error(&r).unwrap() - 1e-4).abs() < 1e-12);
    }
}
