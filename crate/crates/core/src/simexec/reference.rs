use crate::error::{Error, Result};
use crate::masks::Mask;
use crate::matrix::{DenseMatrix, Element};

/// Dense masked attention: `softmax(mask ⊙ q·kᵀ)·v` with masked scores at −∞.
/// Rows with no unmasked score produce zeros.
pub fn dense_reference_mhsa<T: Element>(
    q: &DenseMatrix<T>,
    k: &DenseMatrix<T>,
    v: &DenseMatrix<T>,
    mask: &Mask,
) -> Result<DenseMatrix<T>> {
    dense_reference_mhsa_scaled(q, k, v, mask, None)
}

/// [`dense_reference_mhsa`] with the scores multiplied by `scale` before the softmax.
pub fn dense_reference_mhsa_scaled<T: Element>(
    q: &DenseMatrix<T>,
    k: &DenseMatrix<T>,
    v: &DenseMatrix<T>,
    mask: &Mask,
    scale: Option<T>,
) -> Result<DenseMatrix<T>> {
    let n = q.rows();
    if k.rows() != n
        || q.cols() != k.cols()
        || v.rows() != n
        || mask.n_rows() != n
        || mask.n_cols() != n
    {
        return Err(Error::Shape(format!(
            "q {}x{}, k {}x{}, v {}x{} and mask {}x{} are inconsistent",
            q.rows(),
            q.cols(),
            k.rows(),
            k.cols(),
            v.rows(),
            v.cols(),
            mask.n_rows(),
            mask.n_cols()
        )));
    }
    let mut scores = q.matmul(&k.transpose())?;
    for y in 0..n {
        let row = scores.row_mut(y);
        for (x, s) in row.iter_mut().enumerate() {
            *s = if mask.get(y, x) {
                match scale {
                    Some(c) => *s * c,
                    None => *s,
                }
            } else {
                T::neg_infinity()
            };
        }
        let max = row.iter().fold(T::neg_infinity(), |m, &s| m.max(s));
        if max == T::neg_infinity() {
            row.fill(T::zero());
            continue;
        }
        let mut sum = T::zero();
        for s in row.iter_mut() {
            *s = (*s - max).exp();
            sum = sum + *s;
        }
        for s in row.iter_mut() {
            *s = *s / sum;
        }
    }
    scores.matmul(v)
}
