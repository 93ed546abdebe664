//! Affine-compressed sparse rows.
//!
//! Every compressed line (a row, or a column for the column-compressed layouts)
//! carries one `(a, b, nnzs)` triplet. A non-zero at dense index `c` of the line is
//! stored at packed index `c·a + b`, and the packed index `s` maps back to dense
//! index `(s − b)/a`. Metadata is therefore one triplet per line, independent of
//! the number of non-zeros.

use std::fmt::{self, Write};

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::masks::{self, Mask};
use crate::matrix::{DenseMatrix, Element};

/// Affine indices of one compressed line plus its non-zero count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineRowMeta {
    /// Linear transformation (always positive).
    pub a: Ratio<i64>,
    /// Translation.
    pub b: Ratio<i64>,
    pub nnzs: usize,
}

impl AffineRowMeta {
    pub fn new(a: Ratio<i64>, b: Ratio<i64>, nnzs: usize) -> Self {
        assert!(
            a.is_positive(),
            "linear transformation must be positive, got {a}"
        );
        Self { a, b, nnzs }
    }

    /// Metadata of a line with no non-zeros.
    pub fn empty() -> Self {
        Self::new(Ratio::from_integer(1), Ratio::zero(), 0)
    }

    /// Packed index of dense index `dense`, or `None` for a structural zero.
    ///
    /// Computes `s = dense·a + b` in integers and requires `s` to be integral with
    /// `0 ≤ s < nnzs`.
    #[inline]
    pub fn dense_to_sparse(&self, dense: usize) -> Option<usize> {
        let (an, ad) = (*self.a.numer(), *self.a.denom());
        let (bn, bd) = (*self.b.numer(), *self.b.denom());
        let num = dense as i64 * an * bd + bn * ad;
        let den = ad * bd;
        if num < 0 || num % den != 0 {
            return None;
        }
        let s = (num / den) as usize;
        (s < self.nnzs).then_some(s)
    }

    /// Dense index of packed index `sparse`: `(sparse − b)/a`.
    pub fn sparse_to_dense(&self, sparse: usize) -> Result<usize> {
        if sparse >= self.nnzs {
            return Err(Error::Index {
                index: sparse,
                len: self.nnzs,
            });
        }
        let d = (Ratio::from_integer(sparse as i64) - self.b) / self.a;
        debug_assert!(
            d.is_integer() && !d.is_negative(),
            "non-integral dense index {d}"
        );
        Ok(d.to_integer() as usize)
    }

    /// Half-open dense interval `[−b/a, (nnzs − b)/a)` that contains every non-zero
    /// of the line, rounded outwards. `None` for empty lines.
    pub fn dense_span(&self) -> Option<(i64, i64)> {
        if self.nnzs == 0 {
            return None;
        }
        let start = (-self.b / self.a).floor().to_integer();
        let end = ((Ratio::from_integer(self.nnzs as i64) - self.b) / self.a)
            .ceil()
            .to_integer();
        Some((start, end))
    }
}

impl fmt::Display for AffineRowMeta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a={} b={} nnzs={}", self.a, self.b, self.nnzs)
    }
}

/// The four physical layouts: which axis is compressed, and whether storage walks
/// the compressed lines (`*Major` matching the axis) or cuts across them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AcsrLayout {
    RowCompressedRowMajor,
    RowCompressedColMajor,
    ColCompressedRowMajor,
    ColCompressedColMajor,
}

impl AcsrLayout {
    pub const ALL: [AcsrLayout; 4] = [
        AcsrLayout::RowCompressedRowMajor,
        AcsrLayout::RowCompressedColMajor,
        AcsrLayout::ColCompressedRowMajor,
        AcsrLayout::ColCompressedColMajor,
    ];

    pub fn is_row_compressed(self) -> bool {
        matches!(
            self,
            AcsrLayout::RowCompressedRowMajor | AcsrLayout::RowCompressedColMajor
        )
    }

    /// True when each compressed line is contiguous in memory.
    pub fn is_line_contiguous(self) -> bool {
        matches!(
            self,
            AcsrLayout::RowCompressedRowMajor | AcsrLayout::ColCompressedColMajor
        )
    }

    pub fn tag(self) -> &'static str {
        match self {
            AcsrLayout::RowCompressedRowMajor => "row-compressed-row-major",
            AcsrLayout::RowCompressedColMajor => "row-compressed-col-major",
            AcsrLayout::ColCompressedRowMajor => "col-compressed-row-major",
            AcsrLayout::ColCompressedColMajor => "col-compressed-col-major",
        }
    }
}

impl fmt::Display for AcsrLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// A regularly sparse matrix in affine-compressed form.
#[derive(Clone, Debug, PartialEq)]
pub struct Acsr<T = f32> {
    n_rows: usize,
    n_cols: usize,
    layout: AcsrLayout,
    row_meta: Vec<AffineRowMeta>,
    col_meta: Vec<AffineRowMeta>,
    values: Vec<T>,
    /// Line-contiguous layouts: start of each compressed line. Cross layouts: start
    /// of each packed column `s`, whose entries are the lines with `nnzs > s` in order.
    offsets: Vec<usize>,
}

impl<T: Element> Acsr<T> {
    /// Assembles an ACSR from metadata and values already packed in `layout` order.
    pub fn from_parts(
        n_rows: usize,
        n_cols: usize,
        layout: AcsrLayout,
        meta: Vec<AffineRowMeta>,
        values: Vec<T>,
    ) -> Result<Self> {
        let lines = if layout.is_row_compressed() {
            n_rows
        } else {
            n_cols
        };
        if meta.len() != lines {
            return Err(Error::Shape(format!(
                "expected {lines} metadata triplets, got {}",
                meta.len()
            )));
        }
        let total: usize = meta.iter().map(|m| m.nnzs).sum();
        if values.len() != total {
            return Err(Error::Shape(format!(
                "metadata describes {total} values, got {}",
                values.len()
            )));
        }
        let offsets = if layout.is_line_contiguous() {
            prefix_sums(meta.iter().map(|m| m.nnzs))
        } else {
            let widest = meta.iter().map(|m| m.nnzs).max().unwrap_or(0);
            prefix_sums((0..widest).map(|s| meta.iter().filter(|m| m.nnzs > s).count()))
        };
        let (row_meta, col_meta) = if layout.is_row_compressed() {
            (meta, Vec::new())
        } else {
            (Vec::new(), meta)
        };
        Ok(Self {
            n_rows,
            n_cols,
            layout,
            row_meta,
            col_meta,
            values,
            offsets,
        })
    }

    /// An all-zero row-compressed row-major ACSR with the given row metadata.
    pub fn zeros(n_cols: usize, row_meta: Vec<AffineRowMeta>) -> Self {
        let total = row_meta.iter().map(|m| m.nnzs).sum();
        let n_rows = row_meta.len();
        Self::from_parts(
            n_rows,
            n_cols,
            AcsrLayout::RowCompressedRowMajor,
            row_meta,
            vec![T::zero(); total],
        )
        .expect("consistent by construction")
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn layout(&self) -> AcsrLayout {
        self.layout
    }

    /// Row metadata (empty for column-compressed layouts).
    pub fn row_meta(&self) -> &[AffineRowMeta] {
        &self.row_meta
    }

    /// Column metadata (empty for row-compressed layouts).
    pub fn col_meta(&self) -> &[AffineRowMeta] {
        &self.col_meta
    }

    /// Metadata of the compressed axis.
    pub fn meta(&self) -> &[AffineRowMeta] {
        if self.layout.is_row_compressed() {
            &self.row_meta
        } else {
            &self.col_meta
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Position in `values` of packed entry `s` of compressed line `line`.
    pub fn value_index(&self, line: usize, s: usize) -> usize {
        if self.layout.is_line_contiguous() {
            self.offsets[line] + s
        } else {
            let rank = self.meta()[..line].iter().filter(|m| m.nnzs > s).count();
            self.offsets[s] + rank
        }
    }

    /// Storage position of the dense entry `(row, col)`, `None` for structural zeros.
    #[inline]
    pub fn index_of(&self, row: usize, col: usize) -> Option<usize> {
        if self.layout.is_row_compressed() {
            let s = self.row_meta[row].dense_to_sparse(col)?;
            Some(self.value_index(row, s))
        } else {
            let s = self.col_meta[col].dense_to_sparse(row)?;
            Some(self.value_index(col, s))
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Option<T> {
        self.index_of(row, col).map(|i| self.values[i])
    }

    /// Visits every stored entry as `(row, col, storage index)` in storage order.
    pub fn for_each_entry(&self, mut f: impl FnMut(usize, usize, usize)) {
        let meta = self.meta();
        let row_compressed = self.layout.is_row_compressed();
        let mut emit = |line: usize, s: usize, idx: usize| {
            let dense = meta[line]
                .sparse_to_dense(s)
                .expect("packed index within nnzs");
            if row_compressed {
                f(line, dense, idx)
            } else {
                f(dense, line, idx)
            }
        };
        if self.layout.is_line_contiguous() {
            for (line, m) in meta.iter().enumerate() {
                for s in 0..m.nnzs {
                    emit(line, s, self.offsets[line] + s);
                }
            }
        } else {
            for s in 0..self.offsets.len().saturating_sub(1) {
                let mut idx = self.offsets[s];
                for (line, m) in meta.iter().enumerate() {
                    if m.nnzs > s {
                        emit(line, s, idx);
                        idx += 1;
                    }
                }
            }
        }
    }

    /// The sparsity structure described by the metadata (stored zeros stay set).
    pub fn structure(&self) -> Mask {
        let mut m = Mask::from_fn(self.n_rows, self.n_cols, |_, _| false).expect("non-empty");
        self.for_each_entry(|r, c, _| m.set(r, c, true));
        m
    }

    /// Dense reconstruction: stored values at their coordinates, zero elsewhere.
    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        self.for_each_entry(|r, c, i| d.set(r, c, self.values[i]));
        d
    }

    /// Stable textual dump: a metadata table followed by the values array.
    pub fn debug_dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "acsr {}x{} layout={}",
            self.n_rows, self.n_cols, self.layout
        );
        let axis = if self.layout.is_row_compressed() {
            "row"
        } else {
            "col"
        };
        let _ = writeln!(s, "{axis} a b nnzs");
        for (i, m) in self.meta().iter().enumerate() {
            let _ = writeln!(s, "{i} {} {} {}", m.a, m.b, m.nnzs);
        }
        let vals: Vec<String> = self.values.iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(s, "values {}", vals.join(" "));
        s
    }
}

fn prefix_sums(counts: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut out = vec![0];
    let mut acc = 0;
    for c in counts {
        acc += c;
        out.push(acc);
    }
    out
}

/// Compresses `dense` at the non-zeros of `mask` into the requested layout.
///
/// Column-compressed layouts verify column-wise regularity on the transposed mask.
pub fn build_acsr<T: Element>(
    mask: &Mask,
    dense: &DenseMatrix<T>,
    layout: AcsrLayout,
) -> Result<Acsr<T>> {
    if dense.rows() != mask.n_rows() || dense.cols() != mask.n_cols() {
        return Err(Error::Shape(format!(
            "dense matrix is {}x{} but mask is {}x{}",
            dense.rows(),
            dense.cols(),
            mask.n_rows(),
            mask.n_cols()
        )));
    }
    let row_compressed = layout.is_row_compressed();
    let (meta, line_mask) = if row_compressed {
        (masks::check_regularity(mask)?, None)
    } else {
        let t = mask.transpose();
        (masks::check_regularity(&t)?, Some(t))
    };
    let lines = line_mask.as_ref().unwrap_or(mask);
    let at = |line: usize, dense_idx: usize| {
        if row_compressed {
            dense.get(line, dense_idx)
        } else {
            dense.get(dense_idx, line)
        }
    };

    let mut values = Vec::with_capacity(meta.iter().map(|m| m.nnzs).sum());
    if layout.is_line_contiguous() {
        for line in 0..meta.len() {
            values.extend(lines.row_nonzeros(line).map(|d| at(line, d)));
        }
    } else {
        let cols: Vec<Vec<usize>> = (0..meta.len())
            .map(|l| lines.row_nonzeros(l).collect())
            .collect();
        let widest = cols.iter().map(Vec::len).max().unwrap_or(0);
        for s in 0..widest {
            for (line, c) in cols.iter().enumerate() {
                if let Some(&d) = c.get(s) {
                    values.push(at(line, d));
                }
            }
        }
    }
    Acsr::from_parts(mask.n_rows(), mask.n_cols(), layout, meta, values)
}

/// Re-packs an ACSR into another layout, recomputing metadata for the new
/// compressed axis. The logical matrix is unchanged.
pub fn convert_layout<T: Element>(acsr: &Acsr<T>, target: AcsrLayout) -> Result<Acsr<T>> {
    if acsr.layout() == target {
        return Ok(acsr.clone());
    }
    build_acsr(&acsr.structure(), &acsr.to_dense(), target)
}

/// Dense reconstruction of an ACSR.
pub fn acsr_to_dense<T: Element>(acsr: &Acsr<T>) -> DenseMatrix<T> {
    acsr.to_dense()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::masks::{generate_pattern, PatternSpec};

    fn meta(an: i64, ad: i64, bn: i64, bd: i64, nnzs: usize) -> AffineRowMeta {
        AffineRowMeta::new(Ratio::new(an, ad), Ratio::new(bn, bd), nnzs)
    }

    #[test]
    fn fast_index_examples() {
        assert_eq!(meta(1, 1, -1, 1, 4).dense_to_sparse(2), Some(1));
        assert_eq!(meta(1, 2, 0, 1, 4).dense_to_sparse(3), None);
        assert_eq!(meta(1, 2, 0, 1, 2).dense_to_sparse(6), None);
        assert_eq!(meta(1, 1, -1, 1, 4).dense_to_sparse(0), None);
        assert_eq!(meta(1, 2, -1, 2, 2).dense_to_sparse(3), Some(1));
    }

    #[test]
    fn inverse_index_examples() {
        assert_eq!(meta(1, 1, -1, 1, 4).sparse_to_dense(1).unwrap(), 2);
        for s in 0..5 {
            assert_eq!(meta(1, 1, 0, 1, 5).sparse_to_dense(s).unwrap(), s);
        }
        assert_eq!(meta(1, 2, 0, 1, 4).sparse_to_dense(3).unwrap(), 6);
        assert_eq!(
            meta(1, 2, 0, 1, 4).sparse_to_dense(4),
            Err(Error::Index { index: 4, len: 4 })
        );
    }

    #[test]
    fn dense_span_rounds_outwards() {
        assert_eq!(meta(1, 1, -3, 1, 4).dense_span(), Some((3, 7)));
        assert_eq!(meta(1, 2, -1, 2, 2).dense_span(), Some((1, 5)));
        assert_eq!(AffineRowMeta::empty().dense_span(), None);
    }

    #[test]
    fn full_mask_is_identity_compression() {
        let mask = Mask::full(2, 2).unwrap();
        let dense = DenseMatrix::new(2, 2, vec![1.0f32, 2.0, 3.0, 4.0]).unwrap();
        let a = build_acsr(&mask, &dense, AcsrLayout::RowCompressedRowMajor).unwrap();
        assert_eq!(a.values(), &[1.0, 2.0, 3.0, 4.0]);
        assert!(a.row_meta().iter().all(|m| *m == meta(1, 1, 0, 1, 2)));
        assert_eq!(a.to_dense(), dense);
    }

    #[test]
    fn strided_column_compressed_column_major_groups_columns() {
        let mask = generate_pattern(&PatternSpec::strided(2, 4).unwrap()).unwrap();
        let dense = DenseMatrix::from_fn(4, 4, |i, j| (10 * i + j) as f32);
        let a = build_acsr(&mask, &dense, AcsrLayout::ColCompressedColMajor).unwrap();
        // Oracle: mask-filtered gather per column.
        let mut expect = Vec::new();
        for x in 0..4 {
            for y in 0..4 {
                if mask.get(y, x) {
                    expect.push(dense.get(y, x));
                }
            }
        }
        assert_eq!(a.values(), expect.as_slice());
        assert_eq!(a.col_meta().len(), 4);
        assert!(a.row_meta().is_empty());
        assert_eq!(a.offsets(), &[0, 2, 4, 6, 8]);
    }

    #[test]
    fn cross_layouts_walk_packed_columns() {
        // Rows: {0,1,2}, {1,2}, {2}.
        let mask = Mask::from_fn(3, 3, |y, x| x >= y).unwrap();
        let dense = DenseMatrix::from_fn(3, 3, |i, j| (1 + 3 * i + j) as f32);
        let a = build_acsr(&mask, &dense, AcsrLayout::RowCompressedColMajor).unwrap();
        assert_eq!(a.values(), &[1.0, 5.0, 9.0, 2.0, 6.0, 3.0]);
        assert_eq!(a.offsets(), &[0, 3, 5, 6]);
        assert_eq!(a.get(1, 2), Some(6.0));
        assert_eq!(a.get(2, 0), None);
        assert_eq!(
            a.to_dense(),
            build_acsr(&mask, &dense, AcsrLayout::RowCompressedRowMajor)
                .unwrap()
                .to_dense()
        );
    }

    #[test]
    fn empty_rows_reconstruct_as_zero_rows() {
        let mask = Mask::from_fn(3, 3, |y, x| y != 1 && x == y).unwrap();
        let dense = DenseMatrix::from_fn(3, 3, |_, _| 7.0f32);
        let a = build_acsr(&mask, &dense, AcsrLayout::RowCompressedRowMajor).unwrap();
        assert_eq!(a.row_meta()[1].nnzs, 0);
        assert!(a.to_dense().row(1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn build_rejects_bad_inputs() {
        let mask = Mask::full(2, 2).unwrap();
        let dense = DenseMatrix::<f32>::zeros(3, 2);
        assert!(matches!(
            build_acsr(&mask, &dense, AcsrLayout::RowCompressedRowMajor),
            Err(Error::Shape(_))
        ));
        // Rows are regular but column 0 holds rows {0, 1, 3}.
        let m = Mask::from_fn(4, 2, |y, x| x == 0 && y != 2 || x == 1 && y == 2).unwrap();
        let d = DenseMatrix::<f32>::zeros(4, 2);
        assert!(build_acsr(&m, &d, AcsrLayout::RowCompressedRowMajor).is_ok());
        assert!(matches!(
            build_acsr(&m, &d, AcsrLayout::ColCompressedColMajor),
            Err(Error::Regularity { row: 0, col: 3 })
        ));
    }

    #[test]
    fn identity_conversion_is_a_clone() {
        let mask = generate_pattern(&PatternSpec::windowed(1, 6).unwrap()).unwrap();
        let dense = DenseMatrix::from_fn(6, 6, |i, j| (i * 6 + j) as f32);
        let a = build_acsr(&mask, &dense, AcsrLayout::RowCompressedRowMajor).unwrap();
        assert_eq!(
            convert_layout(&a, AcsrLayout::RowCompressedRowMajor).unwrap(),
            a
        );
    }

    #[test]
    fn debug_dump_is_stable() {
        let mask = Mask::from_fn(2, 3, |y, x| x >= y).unwrap();
        let dense = DenseMatrix::from_fn(2, 3, |i, j| (i * 3 + j) as f32);
        let a = build_acsr(&mask, &dense, AcsrLayout::RowCompressedRowMajor).unwrap();
        assert_eq!(a.debug_dump(), "acsr 2x3 layout=row-compressed-row-major\nrow a b nnzs\n0 1 0 3\n1 1 -1 2\nvalues 0 1 2 4 5\n");
    }
}
