use super::{ExecMetrics, SimConfig};
use crate::acsr::Acsr;
use crate::error::{Error, Result};
use crate::matrix::Element;

/// Row-wise softmax over the stored values of a row-compressed ACSR.
pub fn softmax_acsr<T: Element>(acsr: &Acsr<T>) -> Result<Acsr<T>> {
    softmax_execute(acsr, None, &SimConfig::default()).map(|(a, _)| a)
}

/// Softmax with an optional score scale applied before normalization, plus
/// counters for one thread per row making three passes over its values.
///
/// Each row subtracts its maximum, exponentiates, sums in storage order and
/// divides. Rows with no stored values are left alone.
pub fn softmax_execute<T: Element>(
    acsr: &Acsr<T>,
    scale: Option<T>,
    cfg: &SimConfig,
) -> Result<(Acsr<T>, ExecMetrics)> {
    cfg.validate()?;
    if !acsr.layout().is_row_compressed() {
        return Err(Error::Shape(format!(
            "softmax needs a row-compressed layout, got {}",
            acsr.layout()
        )));
    }
    let mut out = acsr.clone();
    let mut metrics = ExecMetrics::default();
    let mut idx = Vec::new();
    for (row, meta) in acsr.row_meta().iter().enumerate() {
        metrics.threads_launched += 1;
        if meta.nnzs == 0 {
            continue;
        }
        idx.clear();
        idx.extend((0..meta.nnzs).map(|s| acsr.value_index(row, s)));
        let vals = out.values_mut();
        if let Some(c) = scale {
            for &i in &idx {
                vals[i] = vals[i] * c;
            }
        }
        let max = idx.iter().fold(T::neg_infinity(), |m, &i| m.max(vals[i]));
        let mut sum = T::zero();
        for &i in &idx {
            let e = (vals[i] - max).exp();
            vals[i] = e;
            sum = sum + e;
        }
        for &i in &idx {
            vals[i] = vals[i] / sum;
        }
        metrics.inner_loop_iterations += 3 * meta.nnzs as u64;
    }
    metrics.warps = (acsr.n_rows() as u64).div_ceil(cfg.warp_width as u64);
    Ok((out, metrics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acsr::{build_acsr, AcsrLayout};
    use crate::masks::Mask;
    use crate::matrix::DenseMatrix;

    fn one_row(vals: &[f64]) -> Acsr<f64> {
        let n = vals.len();
        let mask = Mask::full(1, n).unwrap();
        build_acsr(
            &mask,
            &DenseMatrix::new(1, n, vals.to_vec()).unwrap(),
            AcsrLayout::RowCompressedRowMajor,
        )
        .unwrap()
    }

    #[test]
    fn uniform_and_shifted_rows() {
        assert_eq!(
            softmax_acsr(&one_row(&[0.0, 0.0])).unwrap().values(),
            &[0.5, 0.5]
        );
        assert_eq!(
            softmax_acsr(&one_row(&[1000.0, 1000.0])).unwrap().values(),
            &[0.5, 0.5]
        );
    }

    #[test]
    fn three_values_match_direct_evaluation() {
        let got = softmax_acsr(&one_row(&[1.0, 2.0, 3.0])).unwrap();
        let z: f64 = [1.0f64, 2.0, 3.0].iter().map(|v| v.exp()).sum();
        for (g, v) in got.values().iter().zip([1.0f64, 2.0, 3.0]) {
            assert!((g - v.exp() / z).abs() < 1e-15);
        }
        assert!((got.values()[0] - 0.09003).abs() < 1e-5);
        assert!((got.values()[2] - 0.66524).abs() < 1e-5);
    }

    #[test]
    fn empty_rows_and_column_layouts() {
        let mask = Mask::from_fn(2, 2, |y, _| y == 0).unwrap();
        let a = build_acsr(
            &mask,
            &DenseMatrix::<f32>::zeros(2, 2),
            AcsrLayout::RowCompressedRowMajor,
        )
        .unwrap();
        let s = softmax_acsr(&a).unwrap();
        assert_eq!(s.values(), &[0.5, 0.5]);
        assert_eq!(s.row_meta(), a.row_meta());
        let full = Mask::full(2, 2).unwrap();
        let c = build_acsr(
            &full,
            &DenseMatrix::<f32>::zeros(2, 2),
            AcsrLayout::ColCompressedColMajor,
        )
        .unwrap();
        assert!(matches!(softmax_acsr(&c), Err(Error::Shape(_))));
    }

    #[test]
    fn cross_layout_rows_are_normalized_per_row() {
        let mask = Mask::from_fn(3, 3, |y, x| x >= y).unwrap();
        let d = DenseMatrix::from_fn(3, 3, |i, j| (i + 2 * j) as f64);
        let row_major =
            softmax_acsr(&build_acsr(&mask, &d, AcsrLayout::RowCompressedRowMajor).unwrap())
                .unwrap();
        let col_major =
            softmax_acsr(&build_acsr(&mask, &d, AcsrLayout::RowCompressedColMajor).unwrap())
                .unwrap();
        assert!(row_major.to_dense().bit_identical(&col_major.to_dense()));
    }
}
