use super::{map_blocks, ExecMetrics, SimConfig};
use crate::acsr::{Acsr, AffineRowMeta};
use crate::error::{Error, Result};
use crate::masks::{Mask, PointSet};
use crate::matrix::{DenseMatrix, Element};
use crate::tiling::Arrangement;

/// Sampled dense-dense product over a tiling.
///
/// Thread `(i, j)` of a block computes `anchor + (i·s, j·s)`. Threads landing on
/// the mask take the dot product of `a`'s row and `b`'s column (ascending k) and
/// store it at the row's packed index; the first thread to produce a point does
/// the work, later ones are redundant. Threads landing off the mask are divergent
/// the first time that point is touched and redundant afterwards, so the two
/// counters equal the arrangement's φ_TD and φ_R.
///
/// The result is written in row-compressed row-major layout.
pub fn rsddmm_execute<T: Element>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    mask: &Mask,
    arr: &Arrangement,
    meta: &[AffineRowMeta],
    cfg: &SimConfig,
) -> Result<(Acsr<T>, ExecMetrics)> {
    cfg.validate()?;
    let (rows, cols) = (mask.n_rows(), mask.n_cols());
    if a.rows() != rows || b.cols() != cols || a.cols() != b.rows() {
        return Err(Error::Shape(format!(
            "cannot sample a {}x{} by {}x{} product on a {rows}x{cols} mask",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    if meta.len() != rows {
        return Err(Error::Shape(format!(
            "expected {rows} row metadata entries, got {}",
            meta.len()
        )));
    }
    let p = mask.point_set();
    if arr.point_set().width() != cols || arr.point_set().height() != rows {
        return Err(Error::Shape(
            "arrangement was built for a different grid".into(),
        ));
    }
    let bt = b.transpose();
    let (m, n) = (arr.m(), arr.n());

    // Per block, in thread order: the point and its value when it is on the mask.
    let computed = map_blocks(arr.lambda(), cfg.parallel, |bi| {
        let tb = &arr.blocks()[bi];
        tb.comp_points()
            .map(|q| {
                let v = p.contains(q).then(|| dot(a.row(q.y), bt.row(q.x)));
                (q, v)
            })
            .collect::<Vec<_>>()
    });

    let mut out = Acsr::zeros(cols, meta.to_vec());
    let mut produced = PointSet::empty(cols, rows);
    let mut touched_off_mask = PointSet::empty(cols, rows);
    let mut off_grid = std::collections::HashSet::new();
    let mut metrics = ExecMetrics::default();
    let k = a.cols() as u64;
    let warps_per_block = (m * n).div_ceil(cfg.warp_width) as u64;

    for (bi, threads) in computed.into_iter().enumerate() {
        let s = arr.blocks()[bi].stretch;
        metrics.threads_launched += threads.len() as u64;
        metrics.warps += warps_per_block;
        metrics.uncoalesced_warp_sum += warps_per_block as f64 * (1.0 - 1.0 / s as f64);
        for (q, v) in threads {
            match v {
                Some(v) => {
                    metrics.flops += k;
                    if produced.insert(q) {
                        let sp = meta[q.y]
                            .dense_to_sparse(q.x)
                            .expect("mask point has a packed index");
                        let idx = out.value_index(q.y, sp);
                        out.values_mut()[idx] = v;
                    } else {
                        metrics.redundant_threads += 1;
                    }
                }
                None => {
                    let first = if q.x < cols && q.y < rows {
                        touched_off_mask.insert(q)
                    } else {
                        off_grid.insert(q)
                    };
                    if first {
                        metrics.divergent_threads += 1;
                    } else {
                        metrics.redundant_threads += 1;
                    }
                }
            }
        }
    }
    if produced.len() != p.len() {
        let missing = p
            .iter()
            .find(|&q| !produced.contains(q))
            .expect("some point is missing");
        return Err(Error::Coverage {
            x: missing.x,
            y: missing.y,
        });
    }
    Ok((out, metrics))
}

#[inline]
fn dot<T: Element>(x: &[T], y: &[T]) -> T {
    let mut acc = T::zero();
    for (&u, &v) in x.iter().zip(y) {
        acc = acc + u * v;
    }
    acc
}
