use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::Mask;
use crate::acsr::AffineRowMeta;
use crate::error::{Error, Result};

/// Density threshold separating sparse from dense masks.
pub const DEFAULT_ALPHA: f64 = 0.10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Density {
    Sparse,
    Dense,
}

/// Result of the density analysis pass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityClass {
    pub nnz: usize,
    pub cells: usize,
    pub density: f64,
    pub alpha: f64,
    pub classification: Density,
}

impl DensityClass {
    pub fn from_counts(nnz: usize, cells: usize, alpha: f64) -> Self {
        let density = if cells == 0 {
            0.0
        } else {
            nnz as f64 / cells as f64
        };
        let classification = if density >= alpha {
            Density::Dense
        } else {
            Density::Sparse
        };
        Self {
            nnz,
            cells,
            density,
            alpha,
            classification,
        }
    }

    pub fn is_dense(&self) -> bool {
        self.classification == Density::Dense
    }
}

/// Solves the affine indices of every row and verifies that each row is
/// affine-compressible.
///
/// For a row whose first two non-zero columns are `i0 < i1` the indices solve
/// `a·i0 + b = 0`, `a·i1 + b = 1`; every later non-zero must then land exactly one
/// step after its predecessor. Rows with a single non-zero get `a = 1, b = −c`,
/// empty rows get `a = 1, b = 0, nnzs = 0`.
pub fn check_regularity(mask: &Mask) -> Result<Vec<AffineRowMeta>> {
    (0..mask.n_rows())
        .map(|row| {
            let cols: Vec<usize> = mask.row_nonzeros(row).collect();
            row_meta(row, &cols)
        })
        .collect()
}

pub(crate) fn row_meta(row: usize, cols: &[usize]) -> Result<AffineRowMeta> {
    match cols {
        [] => Ok(AffineRowMeta::empty()),
        [c] => Ok(AffineRowMeta::new(
            Ratio::from_integer(1),
            Ratio::from_integer(-(*c as i64)),
            1,
        )),
        [i0, i1, ..] => {
            let gap = (*i1 - *i0) as i64;
            let a = Ratio::new(1, gap);
            let b = Ratio::new(-(*i0 as i64), gap);
            for w in cols.windows(2) {
                let prev = a * Ratio::from_integer(w[0] as i64) + b;
                let cur = a * Ratio::from_integer(w[1] as i64) + b;
                if cur != prev + Ratio::from_integer(1) {
                    return Err(Error::Regularity { row, col: w[1] });
                }
            }
            Ok(AffineRowMeta::new(a, b, cols.len()))
        }
    }
}

/// Classifies a mask as dense when its fraction of non-zeros reaches `alpha`.
pub fn density_analysis(mask: &Mask, alpha: f64) -> DensityClass {
    DensityClass::from_counts(mask.nnz(), mask.n_rows() * mask.n_cols(), alpha)
}
